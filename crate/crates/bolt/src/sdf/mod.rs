//! Signed distance fields sampled on regular grids.
//!
//! Sign comes from the generalized winding number (see [`winding`]), which
//! stays meaningful on open meshes: a tube with open ends still gets a
//! negative interior because the winding number decays smoothly instead of
//! flipping at a missing cap. Distance is the exact nearest distance to the
//! triangle soup. Fields over the same grid can be unioned (pointwise min)
//! with an optional inflation offset that seals small gaps between parts.

pub mod winding;

pub use winding::{winding_number, winding_number_many};

use crate::mesh::{TriMesh3, TriangleBvh};
use crate::{Error, Result, Vec3};
use rayon::prelude::*;

/// Winding number above which a query point counts as inside.
pub const DEFAULT_WINDING_THRESHOLD: f64 = 0.25;

/// Default inflation subtracted when unioning collider parts, in cm.
pub const DEFAULT_UNION_INFLATE: f64 = 0.2;

/// Regular grid of sample nodes: `dims` nodes per axis, spaced `cell` apart,
/// first node at `origin`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub origin: Vec3,
    pub cell: f64,
    pub dims: [usize; 3],
}

impl GridSpec {
    /// Grid covering `[lo, hi]` expanded by `margin` on every side.
    pub fn from_aabb(lo: Vec3, hi: Vec3, cell: f64, margin: f64) -> Result<GridSpec> {
        if !(cell > 0.0) || !cell.is_finite() {
            return Err(Error::invalid("grid cell size", format!("{cell}")));
        }
        let lo = lo - Vec3::repeat(margin);
        let hi = hi + Vec3::repeat(margin);
        let mut dims = [0usize; 3];
        for a in 0..3 {
            let span = hi[a] - lo[a];
            if !(span >= 0.0) {
                return Err(Error::invalid("grid bounds", format!("axis {a}: lo > hi")));
            }
            dims[a] = (span / cell).ceil() as usize + 2;
        }
        Ok(GridSpec {
            origin: lo,
            cell,
            dims,
        })
    }

    pub fn node_count(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.dims[1] + iy) * self.dims[2] + iz
    }

    pub fn node_pos(&self, ix: usize, iy: usize, iz: usize) -> Vec3 {
        self.origin + Vec3::new(ix as f64, iy as f64, iz as f64) * self.cell
    }

    /// Upper corner of the sampled region.
    pub fn max_corner(&self) -> Vec3 {
        self.node_pos(self.dims[0] - 1, self.dims[1] - 1, self.dims[2] - 1)
    }

    fn validate(&self) -> Result<()> {
        if self.dims.iter().any(|&d| d < 2) {
            return Err(Error::invalid(
                "grid dims",
                format!("{:?}: need at least 2 nodes per axis", self.dims),
            ));
        }
        if !(self.cell > 0.0)
            || !self.cell.is_finite()
            || !self.origin.iter().all(|v| v.is_finite())
        {
            return Err(Error::invalid("grid spec", "non-finite origin or cell"));
        }
        Ok(())
    }
}

/// Scalar field sampled at grid nodes, trilinearly interpolated in between.
/// Queries outside the grid clamp to the boundary.
#[derive(Debug, Clone)]
pub struct SampledSdf {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl SampledSdf {
    /// Field with no geometry: +∞ everywhere. Unioning with it is a no-op
    /// (up to the union's inflation offset).
    pub fn empty(grid: GridSpec) -> SampledSdf {
        let n = grid.node_count();
        SampledSdf {
            grid,
            values: vec![f64::INFINITY; n],
        }
    }

    /// Winding-signed nearest-distance field for a triangle mesh.
    pub fn build(mesh: &TriMesh3, grid: GridSpec, winding_threshold: f64) -> Result<SampledSdf> {
        if mesh.triangles.is_empty() {
            grid.validate()?;
            return Ok(SampledSdf::empty(grid));
        }
        let bvh = TriangleBvh::build(mesh);
        Self::build_with(mesh, &bvh, grid, winding_threshold)
    }

    /// Same as [`SampledSdf::build`] but reuses an existing BVH.
    pub fn build_with(
        mesh: &TriMesh3,
        bvh: &TriangleBvh,
        grid: GridSpec,
        winding_threshold: f64,
    ) -> Result<SampledSdf> {
        grid.validate()?;
        if mesh.triangles.is_empty() {
            return Ok(SampledSdf::empty(grid));
        }
        let nodes: Vec<Vec3> = (0..grid.dims[0])
            .flat_map(|ix| {
                (0..grid.dims[1]).flat_map(move |iy| (0..grid.dims[2]).map(move |iz| (ix, iy, iz)))
            })
            .map(|(ix, iy, iz)| grid.node_pos(ix, iy, iz))
            .collect();
        let winding = winding_number_many(mesh, &nodes);
        let values: Vec<f64> = nodes
            .par_iter()
            .with_min_len(64)
            .zip(winding.par_iter())
            .map(|(p, w)| {
                let d = bvh.closest_point(mesh, *p).distance;
                if *w > winding_threshold {
                    -d
                } else {
                    d
                }
            })
            .collect();
        Ok(SampledSdf { grid, values })
    }

    /// Subtract `eps` everywhere (inflates the negative region).
    pub fn inflate(&mut self, eps: f64) {
        for v in &mut self.values {
            *v -= eps;
        }
    }

    /// Trilinear value at `p`, clamped to the grid.
    pub fn value(&self, p: Vec3) -> f64 {
        let g = &self.grid;
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..3 {
            let t = ((p[a] - g.origin[a]) / g.cell).clamp(0.0, (g.dims[a] - 1) as f64);
            let i = (t.floor() as usize).min(g.dims[a] - 2);
            base[a] = i;
            frac[a] = t - i as f64;
        }
        let mut v = 0.0;
        for dx in 0..2 {
            for dy in 0..2 {
                for dz in 0..2 {
                    let w = (if dx == 0 { 1.0 - frac[0] } else { frac[0] })
                        * (if dy == 0 { 1.0 - frac[1] } else { frac[1] })
                        * (if dz == 0 { 1.0 - frac[2] } else { frac[2] });
                    if w > 0.0 {
                        v += w * self.values[g.index(base[0] + dx, base[1] + dy, base[2] + dz)];
                    }
                }
            }
        }
        v
    }

    /// Value and gradient at `p`. The gradient is a central difference of the
    /// interpolated field at half-cell spacing, so it stays finite across cell
    /// boundaries and clamps at the grid edge like the value does.
    pub fn sample(&self, p: Vec3) -> (f64, Vec3) {
        let h = 0.5 * self.grid.cell;
        let mut grad = Vec3::zeros();
        for a in 0..3 {
            let mut hi = p;
            let mut lo = p;
            hi[a] += h;
            lo[a] -= h;
            grad[a] = (self.value(hi) - self.value(lo)) / (2.0 * h);
        }
        (self.value(p), grad)
    }

    /// Resample onto a different grid by trilinear interpolation.
    pub fn resample(&self, grid: GridSpec) -> Result<SampledSdf> {
        grid.validate()?;
        let mut values = Vec::with_capacity(grid.node_count());
        for ix in 0..grid.dims[0] {
            for iy in 0..grid.dims[1] {
                for iz in 0..grid.dims[2] {
                    values.push(self.value(grid.node_pos(ix, iy, iz)));
                }
            }
        }
        Ok(SampledSdf { grid, values })
    }

    /// Serialize for external inspection: origin (3×f64), cell (f64),
    /// dims (3×u64), then node values (f64, x-major/z-fastest), all LE.
    pub fn write_debug(&self, path: &std::path::Path) -> Result<()> {
        use std::io::Write;
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(|e| Error::io(path, e));
        for a in 0..3 {
            put(&self.grid.origin[a].to_le_bytes())?;
        }
        put(&self.grid.cell.to_le_bytes())?;
        for a in 0..3 {
            put(&(self.grid.dims[a] as u64).to_le_bytes())?;
        }
        for v in &self.values {
            put(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Inverse of [`SampledSdf::write_debug`].
    pub fn read_debug(path: &std::path::Path) -> Result<SampledSdf> {
        use std::io::Read;
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = std::io::BufReader::new(file);
        let f64_of = |r: &mut std::io::BufReader<std::fs::File>| -> Result<f64> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b).map_err(|e| Error::io(path, e))?;
            Ok(f64::from_le_bytes(b))
        };
        let origin = Vec3::new(f64_of(&mut r)?, f64_of(&mut r)?, f64_of(&mut r)?);
        let cell = f64_of(&mut r)?;
        let mut dims = [0usize; 3];
        for d in &mut dims {
            let mut b = [0u8; 8];
            r.read_exact(&mut b).map_err(|e| Error::io(path, e))?;
            let v = u64::from_le_bytes(b);
            if v < 2 || v > 100_000_000 {
                return Err(Error::parse(path, format!("implausible grid dim {v}")));
            }
            *d = v as usize;
        }
        let grid = GridSpec { origin, cell, dims };
        grid.validate()
            .map_err(|e| Error::parse(path, e.to_string()))?;
        let mut values = Vec::with_capacity(grid.node_count());
        for _ in 0..grid.node_count() {
            values.push(f64_of(&mut r)?);
        }
        Ok(SampledSdf { grid, values })
    }
}

/// Pointwise minimum of several fields over a shared grid, minus `inflate`.
/// Fields on other grids are resampled onto the first field's grid.
pub fn sdf_union(parts: &[&SampledSdf], inflate: f64) -> Result<SampledSdf> {
    let first = parts
        .first()
        .ok_or_else(|| Error::invalid("sdf union", "no fields given"))?;
    let grid = first.grid;
    let mut values = first.values.clone();
    for part in &parts[1..] {
        if part.grid == grid {
            for (v, o) in values.iter_mut().zip(&part.values) {
                *v = v.min(*o);
            }
        } else {
            let r = part.resample(grid)?;
            for (v, o) in values.iter_mut().zip(&r.values) {
                *v = v.min(*o);
            }
        }
    }
    for v in &mut values {
        *v -= inflate;
    }
    Ok(SampledSdf { grid, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{open_tube, uv_sphere};
    use approx::assert_relative_eq;

    fn sphere_field(center: Vec3, radius: f64) -> SampledSdf {
        let mesh = uv_sphere(center, radius, 48, 32);
        let grid = GridSpec::from_aabb(
            center - Vec3::repeat(radius + 1.0),
            center + Vec3::repeat(radius + 1.0),
            0.25,
            0.0,
        )
        .unwrap();
        SampledSdf::build(&mesh, grid, DEFAULT_WINDING_THRESHOLD).unwrap()
    }

    #[test]
    fn sphere_matches_analytic_distance() {
        let c = Vec3::new(0.3, -0.2, 0.1);
        let f = sphere_field(c, 2.0);
        // faceting error of the 48x32 sphere plus trilinear error
        let tol = 0.05;
        let mut checked = 0;
        for ix in 0..f.grid.dims[0] {
            for iy in 0..f.grid.dims[1] {
                for iz in (ix + iy) % 3..f.grid.dims[2] {
                    let p = f.grid.node_pos(ix, iy, iz);
                    let analytic = (p - c).norm() - 2.0;
                    let got = f.values[f.grid.index(ix, iy, iz)];
                    assert!(
                        (got - analytic).abs() < tol,
                        "node {p:?}: got {got}, analytic {analytic}"
                    );
                    checked += 1;
                }
            }
        }
        assert!(checked > 1000);
    }

    #[test]
    fn gradient_is_radial_for_sphere() {
        let c = Vec3::zeros();
        let f = sphere_field(c, 2.0);
        for p in [
            Vec3::new(1.0, 0.5, -0.3),
            Vec3::new(-2.4, 0.1, 0.2),
            Vec3::new(0.0, 2.6, 0.0),
        ] {
            let (_, g) = f.sample(p);
            let radial = p.normalize();
            assert!(g.dot(&radial) > 0.8, "at {p:?}: grad {g:?}");
            assert_relative_eq!(g.norm(), 1.0, epsilon = 0.2);
        }
    }

    #[test]
    fn open_tube_interior_is_sealed() {
        let mesh = open_tube(Vec3::zeros(), 3.0, 8.0, 32, 8);
        let grid = GridSpec::from_aabb(Vec3::repeat(-5.0), Vec3::repeat(5.0), 0.4, 0.0).unwrap();
        let f = SampledSdf::build(&mesh, grid, DEFAULT_WINDING_THRESHOLD).unwrap();
        assert!(f.value(Vec3::zeros()) < 0.0, "axis point inside");
        assert!(f.value(Vec3::new(0.0, 3.0, 0.0)) < 0.0);
        assert!(f.value(Vec3::new(4.5, 0.0, 0.0)) > 0.0, "outside the wall");
        // At a grid node the stored value is exact (no trilinear smoothing):
        // distance to the inscribed faceted wall, not to a phantom end cap.
        let node = [12, 12, 12]; // (-0.2, -0.2, -0.2), near the axis
        let p = f.grid.node_pos(node[0], node[1], node[2]);
        let r_inscribed = 3.0 * (std::f64::consts::PI / 32.0).cos();
        let expect = -(r_inscribed - p.xz().norm());
        assert_relative_eq!(
            f.values[f.grid.index(node[0], node[1], node[2])],
            expect,
            epsilon = 0.02
        );
    }

    #[test]
    fn union_takes_pointwise_min_and_inflates() {
        let a = sphere_field(Vec3::new(-1.5, 0.0, 0.0), 2.0);
        let b_mesh = uv_sphere(Vec3::new(1.5, 0.0, 0.0), 2.0, 48, 32);
        let b = SampledSdf::build(&b_mesh, a.grid, DEFAULT_WINDING_THRESHOLD).unwrap();
        let u = sdf_union(&[&a, &b], 0.2).unwrap();
        for (i, v) in u.values.iter().enumerate() {
            let expect = a.values[i].min(b.values[i]) - 0.2;
            assert_relative_eq!(*v, expect, epsilon = 1e-12);
        }
        let e = SampledSdf::empty(a.grid);
        let u2 = sdf_union(&[&a, &e], 0.0).unwrap();
        assert_eq!(u2.values, a.values, "union with empty is a no-op");
    }

    #[test]
    fn resample_and_clamped_queries() {
        let f = sphere_field(Vec3::zeros(), 2.0);
        let coarse = GridSpec::from_aabb(Vec3::repeat(-3.0), Vec3::repeat(3.0), 0.5, 0.0).unwrap();
        let r = f.resample(coarse).unwrap();
        for ix in 0..coarse.dims[0] {
            let p = coarse.node_pos(ix, 3, 4);
            assert_relative_eq!(r.value(p), f.value(p), epsilon = 1e-12);
        }
        // far outside the grid the query clamps rather than extrapolating
        let far = f.value(Vec3::new(100.0, 0.0, 0.0));
        let edge = f.value(Vec3::new(f.grid.max_corner().x, 0.0, 0.0));
        assert_relative_eq!(far, edge, epsilon = 1e-12);
    }

    #[test]
    fn debug_dump_round_trips() {
        let f = sphere_field(Vec3::zeros(), 1.5);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.sdf");
        f.write_debug(&path).unwrap();
        let g = SampledSdf::read_debug(&path).unwrap();
        assert_eq!(f.grid, g.grid);
        assert_eq!(f.values, g.values);
    }

    #[test]
    fn empty_mesh_gives_empty_field() {
        let mesh = TriMesh3::new(Vec::new(), Vec::new());
        let grid = GridSpec::from_aabb(Vec3::zeros(), Vec3::repeat(1.0), 0.5, 0.0).unwrap();
        let f = SampledSdf::build(&mesh, grid, 0.25).unwrap();
        assert!(f.values.iter().all(|v| v.is_infinite() && *v > 0.0));
    }
}
