//! Per-triangle bindings between the 2D pattern layout and the 3D garment
//! surface.
//!
//! Each triangle stores the inverse of its 2D edge matrix. Multiplying a
//! configuration's edge matrix by that inverse expresses the layout's unit
//! x/y axes (warp and weft) in that configuration, so the grain directions
//! ride along with the garment through any deformation that keeps the
//! triangulation intact.

use crate::mesh::{PatternLayout2D, TriMesh3};
use crate::{Error, Mat2, Mat3x2, Result, Vec2, Vec3};

/// Inverse 2D edge matrix per triangle, shared by both layout directions.
#[derive(Debug, Clone)]
pub struct TangentBinding {
    pub m: Vec<Mat2>,
}

/// 2D edge matrix of a layout triangle: columns are the two edges leaving
/// the first vertex.
pub fn edge_matrix_2d(positions: &[Vec2], tri: [u32; 3]) -> Mat2 {
    let a = positions[tri[0] as usize];
    let b = positions[tri[1] as usize];
    let c = positions[tri[2] as usize];
    Mat2::from_columns(&[b - a, c - a])
}

/// 3×2 edge matrix of a triangle in 3D, same edge convention.
pub fn edge_matrix_3d(positions: &[Vec3], tri: [u32; 3]) -> Mat3x2 {
    let a = positions[tri[0] as usize];
    let b = positions[tri[1] as usize];
    let c = positions[tri[2] as usize];
    Mat3x2::from_columns(&[b - a, c - a])
}

pub fn bind_tangents(layout: &PatternLayout2D, mesh: &TriMesh3) -> Result<TangentBinding> {
    if layout.positions.len() != mesh.positions.len() {
        return Err(Error::invalid(
            "layout",
            format!(
                "2D layout has {} positions for {} mesh vertices",
                layout.positions.len(),
                mesh.positions.len()
            ),
        ));
    }
    let mut m = Vec::with_capacity(mesh.triangles.len());
    for (t, &tri) in mesh.triangles.iter().enumerate() {
        let e = edge_matrix_2d(&layout.positions, tri);
        match e.try_inverse() {
            Some(inv) => m.push(inv),
            None => {
                return Err(Error::invalid(
                    "layout",
                    format!("triangle {t} is degenerate in the 2D layout"),
                ));
            }
        }
    }
    Ok(TangentBinding { m })
}

/// Warp/weft tangents of triangle `t` in the given 3D configuration: the
/// columns of (3×2 edge matrix)·M.
pub fn tangent_frame(
    binding: &TangentBinding,
    positions: &[Vec3],
    tri: [u32; 3],
    t: usize,
) -> Mat3x2 {
    edge_matrix_3d(positions, tri) * binding.m[t]
}

/// Least-squares coordinates of 3D vectors in a triangle's edge basis:
/// argmin_b |E·b − v|² solved through the normal equations, applied to both
/// columns of `v` at once. Fails when the 3D triangle is degenerate.
pub fn rebind(e: &Mat3x2, v: &Mat3x2) -> Option<Mat2> {
    let ete = e.transpose() * e;
    ete.try_inverse().map(|inv| inv * (e.transpose() * v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single_triangle(layout2: [Vec2; 3], pos3: [Vec3; 3]) -> (PatternLayout2D, TriMesh3) {
        let layout = PatternLayout2D {
            positions: layout2.to_vec(),
            panel_of_triangle: vec![0],
        };
        let mesh = TriMesh3::new(pos3.to_vec(), vec![[0, 1, 2]]);
        (layout, mesh)
    }

    #[test]
    fn flat_triangle_gives_unit_axes() {
        let (layout, mesh) = single_triangle(
            [
                Vec2::new(0.0, 0.0),
                Vec2::new(1.0, 0.0),
                Vec2::new(0.0, 1.0),
            ],
            [
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
            ],
        );
        let binding = bind_tangents(&layout, &mesh).unwrap();
        let f = tangent_frame(&binding, &mesh.positions, mesh.triangles[0], 0);
        assert_abs_diff_eq!(
            f.column(0).into_owned(),
            Vec3::new(1.0, 0.0, 0.0),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            f.column(1).into_owned(),
            Vec3::new(0.0, 1.0, 0.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn rotated_triangle_rotates_tangents() {
        // same triangle rotated 90° about z: +x maps to +y
        let (layout, mesh) = single_triangle(
            [
                Vec2::new(0.0, 0.0),
                Vec2::new(1.0, 0.0),
                Vec2::new(0.0, 1.0),
            ],
            [
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(-1.0, 0.0, 0.0),
            ],
        );
        let binding = bind_tangents(&layout, &mesh).unwrap();
        let f = tangent_frame(&binding, &mesh.positions, mesh.triangles[0], 0);
        assert_abs_diff_eq!(
            f.column(0).into_owned(),
            Vec3::new(0.0, 1.0, 0.0),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            f.column(1).into_owned(),
            Vec3::new(-1.0, 0.0, 0.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn random_triangles_round_trip_unit_axes() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let l: [Vec2; 3] = std::array::from_fn(|_| {
                Vec2::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))
            });
            let area = 0.5 * (l[1] - l[0]).perp(&(l[2] - l[0]));
            if area.abs() < 0.05 {
                continue;
            }
            let p: [Vec3; 3] = std::array::from_fn(|_| {
                Vec3::new(
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                )
            });
            let n = (p[1] - p[0]).cross(&(p[2] - p[0]));
            if n.norm() < 0.05 {
                continue;
            }
            let (layout, mesh) = single_triangle(l, p);
            let binding = bind_tangents(&layout, &mesh).unwrap();
            // 2D → 3D via the binding, 3D → 2D via the pseudo-inverse:
            // composing the two recovers the unit axes exactly.
            let e3 = edge_matrix_3d(&mesh.positions, mesh.triangles[0]);
            let f = e3 * binding.m[0];
            let back = binding.m[0].try_inverse().unwrap() * rebind(&e3, &f).unwrap();
            assert_abs_diff_eq!(back, Mat2::identity(), epsilon = 1e-9);
        }
    }

    #[test]
    fn degenerate_layout_triangle_is_named() {
        let (layout, mesh) = single_triangle(
            [
                Vec2::new(0.0, 0.0),
                Vec2::new(1.0, 0.0),
                Vec2::new(2.0, 0.0),
            ],
            [
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
            ],
        );
        let err = bind_tangents(&layout, &mesh).unwrap_err();
        assert!(err.to_string().contains("triangle 0"), "{err}");
    }
}
