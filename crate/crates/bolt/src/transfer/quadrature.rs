//! Weak boundary data for the displacement solve: quadrature points in every
//! cell that intersects the body surface, each carrying a prescribed
//! displacement interpolated from the per-vertex source→target map.

use super::grid::SparseDisplacementGrid;
use crate::mesh::primitive::tri_box_overlap;
use crate::mesh::{TriMesh3, TriangleBvh};
use crate::sdf::winding_number;
use crate::{Error, Result, Vec3};
use rayon::prelude::*;

/// 1D Gauss-Legendre rule on [0,1]; weights sum to 1.
pub fn gauss_1d(points: u32) -> Result<Vec<(f64, f64)>> {
    let r3 = 1.0 / (2.0 * 3.0f64.sqrt());
    let r35 = 0.5 * (3.0f64 / 5.0).sqrt();
    match points {
        1 => Ok(vec![(0.5, 1.0)]),
        2 => Ok(vec![(0.5 - r3, 0.5), (0.5 + r3, 0.5)]),
        3 => Ok(vec![
            (0.5 - r35, 5.0 / 18.0),
            (0.5, 8.0 / 18.0),
            (0.5 + r35, 5.0 / 18.0),
        ]),
        n => Err(Error::invalid(
            "quadrature order",
            format!("{n} points per axis unsupported (1..=3)"),
        )),
    }
}

#[derive(Debug, Clone)]
pub struct BoundaryQuadPoint {
    /// Active cell whose trilinear basis carries the penalty term.
    pub cell: u32,
    /// Trilinear weights of the enforcement point within that cell.
    pub trilinear: [f64; 8],
    /// Quadrature weight (cm³).
    pub weight: f64,
    /// Displacement the field should take at the enforcement point.
    pub prescribed: Vec3,
    pub enforce_at: Vec3,
    pub surface_triangle: u32,
    pub surface_bary: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct BoundaryQuadrature {
    pub points: Vec<BoundaryQuadPoint>,
    /// Sorted cells that intersect the body surface.
    pub boundary_cells: Vec<u32>,
}

/// Find surface-intersecting cells and build their quadrature.
///
/// Source and target bodies must share topology; the prescribed displacement
/// at a projected surface point is the barycentric blend of per-vertex
/// `target − source`. Quadrature points inside the body are enforced at their
/// own location, points outside at their surface projection.
pub fn build_boundary_quadrature(
    grid: &SparseDisplacementGrid,
    source_body: &TriMesh3,
    target_body: &TriMesh3,
    points_per_axis: u32,
) -> Result<BoundaryQuadrature> {
    if source_body.positions.len() != target_body.positions.len()
        || source_body.triangles != target_body.triangles
    {
        return Err(Error::invalid(
            "body pair",
            format!(
                "source ({} verts, {} tris) and target ({} verts, {} tris) must share topology",
                source_body.positions.len(),
                source_body.triangles.len(),
                target_body.positions.len(),
                target_body.triangles.len()
            ),
        ));
    }
    let rule = gauss_1d(points_per_axis)?;
    let bvh = TriangleBvh::build(source_body);
    let motion: Vec<Vec3> = source_body
        .positions
        .iter()
        .zip(&target_body.positions)
        .map(|(s, t)| t - s)
        .collect();

    let h = grid.cell_size;
    let half = Vec3::repeat(0.5 * h);
    let cells: Vec<u32> = grid.cells().collect();
    let per_cell: Vec<Vec<BoundaryQuadPoint>> = cells
        .par_iter()
        .with_min_len(16)
        .map(|&cell| {
            let lo = grid.cell_min_corner(cell);
            let center = lo + half;
            let intersects = bvh
                .box_candidates(lo, lo + Vec3::repeat(h))
                .into_iter()
                .any(|t| tri_box_overlap(center, half, source_body.tri_pos(t as usize)));
            if !intersects {
                return Vec::new();
            }
            let mut pts = Vec::with_capacity(rule.len().pow(3));
            for &(tx, wx) in &rule {
                for &(ty, wy) in &rule {
                    for &(tz, wz) in &rule {
                        let xq = lo + Vec3::new(tx, ty, tz) * h;
                        let proj = bvh.closest_point(source_body, xq);
                        let inside = winding_number(source_body, xq) > 0.5;
                        let enforce_at = if inside { xq } else { proj.point };
                        let tri = source_body.triangles[proj.triangle as usize];
                        let mut prescribed = Vec3::zeros();
                        for k in 0..3 {
                            prescribed += proj.bary[k] * motion[tri[k] as usize];
                        }
                        // the projection of a point in a boundary cell lies on
                        // the surface, so its cell is in-band and active
                        let carrier = grid.cell_at(enforce_at).unwrap_or(cell);
                        pts.push(BoundaryQuadPoint {
                            cell: carrier,
                            trilinear: grid.trilinear_weights(carrier, enforce_at),
                            weight: h * h * h * wx * wy * wz,
                            prescribed,
                            enforce_at,
                            surface_triangle: proj.triangle,
                            surface_bary: proj.bary,
                        });
                    }
                }
            }
            pts
        })
        .collect();

    let mut points = Vec::new();
    let mut boundary_cells = Vec::new();
    for (cell, pts) in cells.iter().zip(per_cell) {
        if !pts.is_empty() {
            boundary_cells.push(*cell);
            points.extend(pts);
        }
    }
    Ok(BoundaryQuadrature {
        points,
        boundary_cells,
    })
}
