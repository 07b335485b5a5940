//! Generalized winding numbers, evaluated exactly as a sum of signed solid
//! angles over every triangle (no hierarchical approximation).
//!
//! For watertight meshes the result is integral (0 outside, 1 inside). For
//! open garments it decays smoothly, which is what lets a threshold like 0.25
//! treat tube-like garments as "sealed": points well inside the tube see most
//! of the sphere of directions covered, holes only subtract a little.

use crate::mesh::TriMesh3;
use crate::Vec3;

/// Solid angle of triangle `abc` seen from `q`, in steradians, signed by
/// orientation (van Oosterom & Strackee).
pub fn triangle_solid_angle(q: Vec3, a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let ra = a - q;
    let rb = b - q;
    let rc = c - q;
    let la = ra.norm();
    let lb = rb.norm();
    let lc = rc.norm();
    let numer = ra.dot(&rb.cross(&rc));
    let denom = la * lb * lc + ra.dot(&rb) * lc + rb.dot(&rc) * la + rc.dot(&ra) * lb;
    2.0 * numer.atan2(denom)
}

/// Winding number of `mesh` around `q`: Σ solid angles / 4π.
///
/// Queries landing exactly on the surface are ill-posed; they are detected
/// and retried once from `q` nudged by 1e-9 × bbox diagonal along a fixed
/// direction, keeping results deterministic.
pub fn winding_number(mesh: &TriMesh3, q: Vec3) -> f64 {
    match try_winding(mesh, q) {
        Some(w) => w,
        None => {
            let delta = mesh.bbox_diagonal() * 1e-9;
            let nudged = q + Vec3::new(1.0, 1.0, 1.0).normalize() * delta.max(1e-12);
            try_winding(mesh, nudged).unwrap_or(0.0)
        }
    }
}

/// `None` when the query sits on (or numerically indistinguishable from) the
/// surface, where the solid-angle sum is discontinuous.
fn try_winding(mesh: &TriMesh3, q: Vec3) -> Option<f64> {
    let mut sum = 0.0;
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.tri_pos(t);
        let ra = a - q;
        let rb = b - q;
        let rc = c - q;
        let la = ra.norm();
        let lb = rb.norm();
        let lc = rc.norm();
        let numer = ra.dot(&rb.cross(&rc));
        let denom = la * lb * lc + ra.dot(&rb) * lc + rb.dot(&rc) * la + rc.dot(&ra) * lb;
        let scale = la * lb * lc;
        if scale == 0.0 || (numer.abs() <= 1e-14 * scale && denom <= 1e-14 * scale) {
            // on a vertex, or in-plane on/near the triangle: ambiguous
            return None;
        }
        sum += 2.0 * numer.atan2(denom);
    }
    let w = sum / (4.0 * std::f64::consts::PI);
    w.is_finite().then_some(w)
}

/// Winding evaluated with a deterministic chunked sum so parallel callers can
/// reproduce sequential results bit for bit (summation order is fixed).
pub fn winding_number_many(mesh: &TriMesh3, queries: &[Vec3]) -> Vec<f64> {
    use rayon::prelude::*;
    queries
        .par_iter()
        .with_min_len(64)
        .map(|&q| winding_number(mesh, q))
        .collect()
}
