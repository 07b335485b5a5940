//! Point-vs-surface queries that combine the BVH with winding numbers.

use super::{TriMesh3, TriangleBvh};
use crate::sdf::winding_number;
use crate::Vec3;

/// Result of projecting a query point onto a mesh.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceProjection {
    pub point: Vec3,
    pub triangle: usize,
    pub bary: [f64; 3],
    pub distance: f64,
}

/// Which side of a (possibly open) surface a point falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceSide {
    Inside,
    Outside,
}

/// Nearest point on the mesh surface to `q`.
pub fn closest_point_on_mesh(mesh: &TriMesh3, bvh: &TriangleBvh, q: Vec3) -> SurfaceProjection {
    let hit = bvh.closest_point(mesh, q);
    SurfaceProjection {
        point: hit.point,
        triangle: hit.triangle as usize,
        bary: hit.bary,
        distance: hit.distance,
    }
}

/// Classify by generalized winding number: above `threshold` counts as inside.
pub fn surface_side(mesh: &TriMesh3, q: Vec3, threshold: f64) -> SurfaceSide {
    if winding_number(mesh, q) > threshold {
        SurfaceSide::Inside
    } else {
        SurfaceSide::Outside
    }
}

/// Winding-signed distance: negative inside, positive outside.
pub fn signed_distance(mesh: &TriMesh3, bvh: &TriangleBvh, q: Vec3, threshold: f64) -> f64 {
    let d = bvh.closest_point(mesh, q).distance;
    match surface_side(mesh, q, threshold) {
        SurfaceSide::Inside => -d,
        SurfaceSide::Outside => d,
    }
}
