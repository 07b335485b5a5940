//! Procedural fixtures: spheres, tubes, flat patches, and a sewn tube garment
//! with an exactly developable 2D layout. Used by tests, demos, and anyone
//! who needs a quick body/garment pair without authoring assets.
//!
//! All shapes are CCW with outward normals. Tubes and garments use the y axis.

use crate::mesh::{build_seam_groups, GarmentSheet, PatternLayout2D, TriMesh3};
use crate::sim::material::MaterialParams;
use crate::{Vec2, Vec3};

/// Closed UV sphere: `segments` longitudes, `rings` latitudes (≥ 2 rings
/// counting the pole caps' neighbors).
pub fn uv_sphere(center: Vec3, radius: f64, segments: u32, rings: u32) -> TriMesh3 {
    assert!(segments >= 3 && rings >= 2);
    let mut positions = Vec::new();
    positions.push(center + Vec3::new(0.0, radius, 0.0)); // north
    for i in 1..rings {
        let theta = std::f64::consts::PI * i as f64 / rings as f64;
        for j in 0..segments {
            let phi = std::f64::consts::TAU * j as f64 / segments as f64;
            positions.push(
                center
                    + Vec3::new(
                        radius * theta.sin() * phi.cos(),
                        radius * theta.cos(),
                        radius * theta.sin() * phi.sin(),
                    ),
            );
        }
    }
    positions.push(center + Vec3::new(0.0, -radius, 0.0)); // south
    let south = (positions.len() - 1) as u32;

    let ring = |i: u32, j: u32| 1 + (i - 1) * segments + (j % segments);
    let mut triangles = Vec::new();
    for j in 0..segments {
        triangles.push([0, ring(1, j + 1), ring(1, j)]);
    }
    for i in 1..rings - 1 {
        for j in 0..segments {
            let v00 = ring(i, j);
            let v01 = ring(i, j + 1);
            let v10 = ring(i + 1, j);
            let v11 = ring(i + 1, j + 1);
            triangles.push([v00, v11, v10]);
            triangles.push([v00, v01, v11]);
        }
    }
    for j in 0..segments {
        triangles.push([south, ring(rings - 1, j), ring(rings - 1, j + 1)]);
    }
    TriMesh3::new(positions, triangles)
}

/// Open cylinder wall (no caps), watertight around the circumference.
pub fn open_tube(center: Vec3, radius: f64, height: f64, segments: u32, rings: u32) -> TriMesh3 {
    assert!(segments >= 3 && rings >= 1);
    let mut positions = Vec::new();
    for i in 0..=rings {
        let y = center.y - 0.5 * height + height * i as f64 / rings as f64;
        for j in 0..segments {
            let phi = std::f64::consts::TAU * j as f64 / segments as f64;
            positions.push(Vec3::new(
                center.x + radius * phi.cos(),
                y,
                center.z + radius * phi.sin(),
            ));
        }
    }
    let at = |i: u32, j: u32| i * segments + (j % segments);
    let mut triangles = Vec::new();
    for i in 0..rings {
        for j in 0..segments {
            let v00 = at(i, j);
            let v01 = at(i, j + 1);
            let v10 = at(i + 1, j);
            let v11 = at(i + 1, j + 1);
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    TriMesh3::new(positions, triangles)
}

/// Sewn tube garment around the y axis with a linearly varying radius
/// (cylinder when `r_bottom == r_top`, truncated cone otherwise).
///
/// The closing column is duplicated and sewn by seam pairs, and the 2D layout
/// is the exact development (rectangle or annular sector), so the authored 3D
/// shape carries zero in-plane strain with respect to its own pattern.
pub fn tube_garment(
    center: Vec3,
    r_bottom: f64,
    r_top: f64,
    height: f64,
    segments: u32,
    rings: u32,
    layer: i32,
) -> GarmentSheet {
    assert!(segments >= 3 && rings >= 1);
    let cols = segments + 1; // duplicated closing column
    let mut positions = Vec::new();
    let mut layout = Vec::new();

    // Develop the *faceted* surface exactly: every facet is planar (two rays
    // from the cone apex span it), so unrolling facet by facet is an isometry
    // and the rest pattern carries zero strain for the authored 3D shape.
    // Chord lengths, not arc lengths, must match.
    let slant = ((r_top - r_bottom).powi(2) + height * height).sqrt();
    let chord_b = 2.0 * r_bottom * (std::f64::consts::PI / segments as f64).sin();
    let is_cylinder = (r_top - r_bottom).abs() < 1e-12 * (r_top.abs() + r_bottom.abs() + 1.0);
    // apex parameter along the profile (t=0 bottom ring, t=1 top ring)
    let t_apex = if is_cylinder {
        0.0
    } else {
        r_bottom / (r_bottom - r_top)
    };
    let beta_step = if is_cylinder {
        0.0
    } else {
        2.0 * (chord_b / (2.0 * (t_apex.abs() * slant))).asin()
    };
    for i in 0..=rings {
        let f = i as f64 / rings as f64;
        let y = center.y - 0.5 * height + height * f;
        let r = r_bottom + (r_top - r_bottom) * f;
        for j in 0..cols {
            let phi = std::f64::consts::TAU * j as f64 / segments as f64;
            positions.push(Vec3::new(
                center.x + r * phi.cos(),
                y,
                center.z + r * phi.sin(),
            ));
            if is_cylinder {
                // prism wall → rectangle of chords; u decreasing with angle
                // keeps 2D triangles positively oriented for outward 3D walls
                let u = chord_b * (segments - j) as f64;
                layout.push(Vec2::new(u, height * f));
            } else {
                // cone fan → annular sector around the apex
                let rho = (f - t_apex).abs() * slant;
                let beta = beta_step * (segments - j) as f64;
                layout.push(Vec2::new(rho * beta.cos(), rho * beta.sin()));
            }
        }
    }

    let at = |i: u32, j: u32| i * cols + j;
    let mut triangles = Vec::new();
    for i in 0..rings {
        for j in 0..segments {
            let v00 = at(i, j);
            let v01 = at(i, j + 1);
            let v10 = at(i + 1, j);
            let v11 = at(i + 1, j + 1);
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }

    let mesh = TriMesh3::new(positions, triangles.clone());

    // mirror the layout if the development came out negatively oriented
    let mut layout = layout;
    let probe = {
        let t = triangles[0];
        let a = layout[t[0] as usize];
        let b = layout[t[1] as usize];
        let c = layout[t[2] as usize];
        (b - a).perp(&(c - a))
    };
    if probe < 0.0 {
        for p in &mut layout {
            p.x = -p.x;
        }
    }
    // shift into the positive quadrant for tidy SVG output
    let mut lo = Vec2::repeat(f64::INFINITY);
    for p in &layout {
        lo = lo.inf(p);
    }
    for p in &mut layout {
        *p -= lo;
    }

    let pairs: Vec<(u32, u32)> = (0..=rings).map(|i| (at(i, 0), at(i, segments))).collect();
    let seams = build_seam_groups(&pairs, &mesh).unwrap();

    GarmentSheet {
        layout: PatternLayout2D {
            positions: layout,
            panel_of_triangle: vec![0; mesh.triangles.len()],
        },
        mesh,
        seams,
        material: MaterialParams::default(),
        layer,
        semantics: Default::default(),
    }
}

/// Flat rectangular patch in the XY plane with its natural 2D layout.
pub fn patch_xy(origin: Vec3, nx: u32, ny: u32, dx: f64, dy: f64) -> (TriMesh3, Vec<Vec2>) {
    let mut positions = Vec::new();
    let mut layout = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            positions.push(origin + Vec3::new(i as f64 * dx, j as f64 * dy, 0.0));
            layout.push(Vec2::new(i as f64 * dx, j as f64 * dy));
        }
    }
    let at = |i: u32, j: u32| j * (nx + 1) + i;
    let mut triangles = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let v00 = at(i, j);
            let v10 = at(i + 1, j);
            let v01 = at(i, j + 1);
            let v11 = at(i + 1, j + 1);
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    (TriMesh3::new(positions, triangles), layout)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_is_closed_and_outward() {
        let s = uv_sphere(Vec3::new(1.0, 2.0, 3.0), 2.0, 48, 32);
        s.validate().unwrap();
        assert!(s.boundary_edges().is_empty(), "closed surface");
        // outward: every triangle normal points away from center
        for t in 0..s.triangles.len() {
            let [a, b, c] = s.tri_pos(t);
            let centroid = (a + b + c) / 3.0;
            let n = s.tri_normal(t);
            assert!(
                n.dot(&(centroid - Vec3::new(1.0, 2.0, 3.0))) > 0.0,
                "tri {t}"
            );
        }
        // area approaches 4πr² from below as faceting refines
        let exact = 4.0 * std::f64::consts::PI * 4.0;
        let area = s.total_area();
        assert!(
            area < exact && area > 0.99 * exact,
            "area {area} vs {exact}"
        );
    }

    #[test]
    fn tube_is_open_and_outward() {
        let t = open_tube(Vec3::zeros(), 3.0, 10.0, 24, 6);
        t.validate().unwrap();
        assert_eq!(t.boundary_edges().len(), 48, "two open rims");
        for k in 0..t.triangles.len() {
            let [a, b, c] = t.tri_pos(k);
            let centroid = (a + b + c) / 3.0;
            let radial = Vec3::new(centroid.x, 0.0, centroid.z);
            assert!(t.tri_normal(k).dot(&radial) > 0.0);
        }
    }

    #[test]
    fn tube_garment_is_valid_and_strain_free() {
        for (rb, rt) in [(4.0, 4.0), (5.0, 3.0)] {
            let g = tube_garment(Vec3::zeros(), rb, rt, 6.0, 24, 6, 0);
            g.validate().unwrap();
            // exact development: every 3D edge length matches its 2D length
            for (t, tri) in g.mesh.triangles.iter().enumerate() {
                for k in 0..3 {
                    let a = tri[k] as usize;
                    let b = tri[(k + 1) % 3] as usize;
                    let l3 = (g.mesh.positions[a] - g.mesh.positions[b]).norm();
                    let l2 = (g.layout.positions[a] - g.layout.positions[b]).norm();
                    assert!(
                        (l3 - l2).abs() < 1e-9 * l3.max(1.0),
                        "tri {t} edge {k}: 3D {l3} vs 2D {l2} (radii {rb}/{rt})"
                    );
                }
            }
            // seam joins duplicated column at identical 3D positions
            for group in &g.seams.groups {
                for off in &group.offsets {
                    assert!(off.norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn patch_layout_is_isometric() {
        let (m, uv) = patch_xy(Vec3::new(0.0, 0.0, 5.0), 4, 3, 0.5, 0.5);
        m.validate().unwrap();
        assert_eq!(uv.len(), m.positions.len());
        for (p, q) in m.positions.iter().zip(&uv) {
            assert_eq!(p.x, q.x);
            assert_eq!(p.y, q.y);
        }
    }
}
