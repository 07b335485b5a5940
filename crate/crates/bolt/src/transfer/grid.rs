//! Sparse cubic-cell grid in a band around a body surface. Displacement lives
//! on cell-corner nodes (trilinear), pressure is constant per cell.

use crate::mesh::{TriMesh3, TriangleBvh};
use crate::{Error, Result, Vec3};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Corner order within a cell: `k = dx*4 + dy*2 + dz`, corner at
/// `cell_coord + (dx, dy, dz)`.
pub const CELL_CORNERS: [[i64; 3]; 8] = [
    [0, 0, 0],
    [0, 0, 1],
    [0, 1, 0],
    [0, 1, 1],
    [1, 0, 0],
    [1, 0, 1],
    [1, 1, 0],
    [1, 1, 1],
];

#[derive(Debug, Clone)]
pub struct SparseDisplacementGrid {
    pub cell_size: f64,
    pub band_width: f64,
    /// World position of lattice coordinate (0,0,0).
    pub origin: Vec3,
    cell_index: BTreeMap<[i64; 3], u32>,
    cell_coords: Vec<[i64; 3]>,
    node_index: BTreeMap<[i64; 3], u32>,
    node_coords: Vec<[i64; 3]>,
    cell_nodes: Vec<[u32; 8]>,
    /// Per-node displacement, sized to the active topology.
    pub u: Vec<Vec3>,
    /// Per-cell pressure, sized to the active topology.
    pub p: Vec<f64>,
}

/// Activate every cell whose center is within `band_width` of the body
/// surface and not buried inside the body. The solve domain is the space the
/// garment occupies — outside the body — so fully interior cells are dropped;
/// cells whose center is inside but within half a cell diagonal of the
/// surface are kept because they may straddle it and carry boundary data.
pub fn activate_band(
    body: &TriMesh3,
    cell_size: f64,
    band_width: f64,
) -> Result<SparseDisplacementGrid> {
    if !(cell_size > 0.0) {
        return Err(Error::invalid("cell_size", format!("{cell_size}")));
    }
    if !(band_width >= 2.0 * cell_size) {
        return Err(Error::invalid(
            "band_width",
            format!("{band_width} is below 2×cell_size ({})", 2.0 * cell_size),
        ));
    }
    if body.triangles.is_empty() {
        return Err(Error::invalid("band activation", "body has no triangles"));
    }
    let bvh = TriangleBvh::build(body);
    let (lo, hi) = body.aabb();
    let pad = band_width + cell_size;
    let origin = Vec3::new(
        ((lo.x - pad) / cell_size).floor() * cell_size,
        ((lo.y - pad) / cell_size).floor() * cell_size,
        ((lo.z - pad) / cell_size).floor() * cell_size,
    );
    let count = |a: usize| (((hi[a] + pad) - origin[a]) / cell_size).ceil() as i64;
    let (nx, ny, nz) = (count(0), count(1), count(2));

    let candidates: Vec<[i64; 3]> = (0..nx)
        .flat_map(|i| (0..ny).flat_map(move |j| (0..nz).map(move |k| [i, j, k])))
        .collect();
    let straddle = 0.5 * 3.0f64.sqrt() * cell_size;
    let keep: Vec<[i64; 3]> = candidates
        .par_iter()
        .with_min_len(256)
        .filter(|c| {
            let center = origin
                + Vec3::new(c[0] as f64 + 0.5, c[1] as f64 + 0.5, c[2] as f64 + 0.5) * cell_size;
            let d = bvh.closest_point(body, center).distance;
            d <= band_width
                && (d <= straddle || crate::sdf::winding::winding_number(body, center) <= 0.5)
        })
        .copied()
        .collect();
    if keep.is_empty() {
        return Err(Error::invalid(
            "band activation",
            "no cells within band; check units, cell size, and band width",
        ));
    }

    let mut cell_index = BTreeMap::new();
    for (i, c) in keep.iter().enumerate() {
        cell_index.insert(*c, i as u32);
    }
    let mut node_index = BTreeMap::new();
    for c in &keep {
        for d in CELL_CORNERS {
            let n = [c[0] + d[0], c[1] + d[1], c[2] + d[2]];
            let next = node_index.len() as u32;
            node_index.entry(n).or_insert(next);
        }
    }
    // BTreeMap entry order is insertion-dependent for values; renumber nodes
    // by sorted coordinate so indices are stable under activation order.
    let node_coords: Vec<[i64; 3]> = node_index.keys().copied().collect();
    for (i, c) in node_coords.iter().enumerate() {
        *node_index.get_mut(c).unwrap() = i as u32;
    }
    let cell_nodes: Vec<[u32; 8]> = keep
        .iter()
        .map(|c| {
            let mut nodes = [0u32; 8];
            for (k, d) in CELL_CORNERS.iter().enumerate() {
                nodes[k] = node_index[&[c[0] + d[0], c[1] + d[1], c[2] + d[2]]];
            }
            nodes
        })
        .collect();

    // A band split into disconnected islands usually means the cell size is
    // too coarse relative to the geometry; the solve still works, so warn.
    let components = count_components(&cell_index);
    if components > 1 {
        log::warn!("active band has {components} disconnected components");
    }

    let n_nodes = node_coords.len();
    let n_cells = keep.len();
    Ok(SparseDisplacementGrid {
        cell_size,
        band_width,
        origin,
        cell_index,
        cell_coords: keep,
        node_index,
        node_coords,
        cell_nodes,
        u: vec![Vec3::zeros(); n_nodes],
        p: vec![0.0; n_cells],
    })
}

fn count_components(cells: &BTreeMap<[i64; 3], u32>) -> usize {
    let n = cells.len();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    fn find(parent: &mut [u32], mut i: u32) -> u32 {
        while parent[i as usize] != i {
            parent[i as usize] = parent[parent[i as usize] as usize];
            i = parent[i as usize];
        }
        i
    }
    for (c, &i) in cells {
        for axis in 0..3 {
            let mut nb = *c;
            nb[axis] += 1;
            if let Some(&j) = cells.get(&nb) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri as usize] = rj;
                }
            }
        }
    }
    (0..n as u32).filter(|&i| find(&mut parent, i) == i).count()
}

impl SparseDisplacementGrid {
    pub fn cell_count(&self) -> usize {
        self.cell_coords.len()
    }

    pub fn node_count(&self) -> usize {
        self.node_coords.len()
    }

    pub fn cell_coord(&self, cell: u32) -> [i64; 3] {
        self.cell_coords[cell as usize]
    }

    pub fn cell_nodes(&self, cell: u32) -> [u32; 8] {
        self.cell_nodes[cell as usize]
    }

    pub fn node_pos(&self, node: u32) -> Vec3 {
        let c = self.node_coords[node as usize];
        self.origin + Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64) * self.cell_size
    }

    pub fn cell_center(&self, cell: u32) -> Vec3 {
        let c = self.cell_coords[cell as usize];
        self.origin
            + Vec3::new(c[0] as f64 + 0.5, c[1] as f64 + 0.5, c[2] as f64 + 0.5) * self.cell_size
    }

    pub fn cell_min_corner(&self, cell: u32) -> Vec3 {
        let c = self.cell_coords[cell as usize];
        self.origin + Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64) * self.cell_size
    }

    pub fn cells(&self) -> impl Iterator<Item = u32> + '_ {
        0..self.cell_coords.len() as u32
    }

    /// Active cell containing `p`, if any.
    pub fn cell_at(&self, p: Vec3) -> Option<u32> {
        let mut c = [0i64; 3];
        for a in 0..3 {
            c[a] = ((p[a] - self.origin[a]) / self.cell_size).floor() as i64;
        }
        self.cell_index.get(&c).copied()
    }

    /// Trilinear weights of `p` within `cell`, clamped to [0,1] per axis.
    pub fn trilinear_weights(&self, cell: u32, p: Vec3) -> [f64; 8] {
        let lo = self.cell_min_corner(cell);
        let mut t = [0.0f64; 3];
        for a in 0..3 {
            t[a] = ((p[a] - lo[a]) / self.cell_size).clamp(0.0, 1.0);
        }
        let mut w = [0.0f64; 8];
        for (k, d) in CELL_CORNERS.iter().enumerate() {
            w[k] = (0..3)
                .map(|a| if d[a] == 1 { t[a] } else { 1.0 - t[a] })
                .product();
        }
        w
    }

    /// Displacement at `p`: trilinear inside the band, nearest active node
    /// outside it (clamped). Returns `(u, was_inside_band)`.
    pub fn sample_displacement(&self, p: Vec3) -> (Vec3, bool) {
        if let Some(cell) = self.cell_at(p) {
            let w = self.trilinear_weights(cell, p);
            let nodes = self.cell_nodes(cell);
            let mut u = Vec3::zeros();
            for k in 0..8 {
                u += w[k] * self.u[nodes[k] as usize];
            }
            (u, true)
        } else {
            let mut best = (f64::INFINITY, 0u32);
            for (i, c) in self.node_coords.iter().enumerate() {
                let q =
                    self.origin + Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64) * self.cell_size;
                let d = (q - p).norm_squared();
                if d < best.0 {
                    best = (d, i as u32);
                }
            }
            (self.u[best.1 as usize], false)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::uv_sphere;

    #[test]
    fn band_cells_stay_within_band_and_outside_body() {
        let body = uv_sphere(Vec3::zeros(), 1.0, 24, 16);
        let grid = activate_band(&body, 0.5, 1.0).unwrap();
        let bvh = TriangleBvh::build(&body);
        let straddle = 0.5 * 3.0f64.sqrt() * grid.cell_size;
        assert!(grid.cell_count() > 0);
        for c in grid.cells() {
            let center = grid.cell_center(c);
            let d = bvh.closest_point(&body, center).distance;
            assert!(d <= 1.0 + 1e-12, "cell {c} center at distance {d}");
            // no cell is buried inside the body
            if crate::sdf::winding::winding_number(&body, center) > 0.5 {
                assert!(d <= straddle, "cell {c} buried at depth {d}");
            }
        }
        assert_eq!(grid.u.len(), grid.node_count());
        assert_eq!(grid.p.len(), grid.cell_count());
    }

    #[test]
    fn band_matches_dense_scan_oracle() {
        let body = uv_sphere(Vec3::new(0.1, -0.2, 0.05), 1.0, 16, 12);
        let cell = 0.25;
        let band = 0.6;
        let grid = activate_band(&body, cell, band).unwrap();
        // dense scan: same lattice, distances by brute force over triangles
        let mut expected = 0usize;
        let (lo, hi) = body.aabb();
        let pad = band + cell;
        let start = [
            ((lo.x - pad) / cell).floor() as i64,
            ((lo.y - pad) / cell).floor() as i64,
            ((lo.z - pad) / cell).floor() as i64,
        ];
        let stop = [
            ((hi.x + pad) / cell).ceil() as i64,
            ((hi.y + pad) / cell).ceil() as i64,
            ((hi.z + pad) / cell).ceil() as i64,
        ];
        for i in start[0]..stop[0] {
            for j in start[1]..stop[1] {
                for k in start[2]..stop[2] {
                    let center = Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) * cell;
                    let mut d = f64::INFINITY;
                    for t in 0..body.triangles.len() {
                        let [a, b, c3] = body.tri_pos(t);
                        let (q, _) =
                            crate::mesh::primitive::closest_point_triangle(center, a, b, c3);
                        d = d.min((center - q).norm());
                    }
                    let straddle = 0.5 * 3.0f64.sqrt() * cell;
                    let outside = crate::sdf::winding::winding_number(&body, center) <= 0.5;
                    if d <= band && (d <= straddle || outside) {
                        expected += 1;
                    }
                }
            }
        }
        assert_eq!(grid.cell_count(), expected);
    }

    #[test]
    fn rejects_bad_band_or_empty_body() {
        let body = uv_sphere(Vec3::zeros(), 1.0, 8, 6);
        assert!(activate_band(&body, 0.5, 0.8).is_err(), "band < 2 cells");
        let empty = TriMesh3::new(vec![], vec![]);
        assert!(activate_band(&empty, 0.5, 1.0).is_err());
    }

    #[test]
    fn trilinear_sampling_reproduces_linear_fields() {
        let body = uv_sphere(Vec3::zeros(), 1.0, 16, 12);
        let mut grid = activate_band(&body, 0.5, 1.0).unwrap();
        // u(x) = Mx + b is reproduced exactly by trilinear interpolation
        let m = crate::Mat3::new(0.1, 0.02, 0.0, -0.03, 0.2, 0.01, 0.0, 0.05, -0.1);
        let b = Vec3::new(0.3, -0.1, 0.2);
        for n in 0..grid.node_count() as u32 {
            let p = grid.node_pos(n);
            grid.u[n as usize] = m * p + b;
        }
        for q in [
            Vec3::new(0.9, 0.1, 0.2),
            Vec3::new(-0.3, 1.1, 0.0),
            Vec3::new(0.0, 0.0, 1.3),
        ] {
            let (u, inside) = grid.sample_displacement(q);
            assert!(inside);
            assert!((u - (m * q + b)).norm() < 1e-12, "at {q:?}");
        }
        // far outside the band falls back to the nearest node's value
        let (_, inside) = grid.sample_displacement(Vec3::new(50.0, 0.0, 0.0));
        assert!(!inside);
    }

    #[test]
    fn cell_lookup_roundtrip() {
        let body = uv_sphere(Vec3::zeros(), 1.0, 16, 12);
        let grid = activate_band(&body, 0.5, 1.0).unwrap();
        for c in grid.cells() {
            assert_eq!(grid.cell_at(grid.cell_center(c)), Some(c));
            let nodes = grid.cell_nodes(c);
            let lo = grid.cell_min_corner(c);
            assert!((grid.node_pos(nodes[0]) - lo).norm() < 1e-12);
            assert!((grid.node_pos(nodes[7]) - (lo + Vec3::repeat(grid.cell_size))).norm() < 1e-12);
        }
    }
}
