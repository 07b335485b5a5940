//! Fold-angle springs across seams.
//!
//! A sewn border edge exists twice, once per panel. The two copies plus the
//! opposite vertices of their owning triangles form a virtual hinge: the
//! hinge edge runs through the copies' midpoints, the wings are the opposite
//! vertices. A damped torsion spring drives the dihedral angle back to its
//! value at drape start, with forces distributed so they sum to zero; forces
//! on a midpoint split evenly between its two sewn copies.

use crate::mesh::{seam_edge_pairs, SeamSpec, TriMesh3};
use crate::sim::material::SeamMaterial;
use crate::Vec3;
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct SeamHinge {
    /// Border edge on each side; `edges[1][k]` is sewn to `edges[0][k]`.
    pub edges: [[u32; 2]; 2],
    /// Opposite vertex of the triangle owning each edge.
    pub wings: [u32; 2],
    pub rest_angle: f64,
}

/// Signed dihedral angle of the virtual hinge and the angle gradients for
/// its four virtual vertices `(m0, m1, wing_a, wing_b)`. `None` when either
/// virtual triangle is collapsed.
fn hinge_angle(m0: Vec3, m1: Vec3, wa: Vec3, wb: Vec3) -> Option<(f64, [Vec3; 4])> {
    let e = m1 - m0;
    let le = e.norm();
    let n1 = e.cross(&(wa - m0));
    let n2 = (-e).cross(&(wb - m1));
    let (l1, l2) = (n1.norm(), n2.norm());
    if le < 1e-10 || l1 < 1e-12 || l2 < 1e-12 {
        return None;
    }
    let eh = e / le;
    let (u1, u2) = (n1 / l1, n2 / l2);
    let theta = (u1.cross(&u2).dot(&eh)).atan2(u1.dot(&u2));

    // standard hinge-angle gradients: the wings move against their triangle
    // normals, the edge ends carry the balancing shares (the four vectors sum
    // to zero, so the derived forces are momentum-free by construction)
    let b1 = n1 / (l1 * l1);
    let b2 = n2 / (l2 * l2);
    let g_wa = -le * b1;
    let g_wb = -le * b2;
    let g_m0 = -((wa - m1).dot(&eh)) * b1 - ((wb - m1).dot(&eh)) * b2;
    let g_m1 = (wa - m0).dot(&eh) * b1 + (wb - m0).dot(&eh) * b2;
    Some((theta, [g_m0, g_m1, g_wa, g_wb]))
}

/// Find all virtual hinges of a sewn garment and record their fold angle in
/// the given start configuration.
pub fn build_seam_hinges(mesh: &TriMesh3, seams: &SeamSpec, positions: &[Vec3]) -> Vec<SeamHinge> {
    // border edge -> (owning triangle, opposite vertex)
    let mut owner: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    let border: std::collections::BTreeSet<(u32, u32)> = mesh.boundary_edges().into_iter().collect();
    for tri in &mesh.triangles {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            if border.contains(&key) {
                owner.insert(key, tri[(k + 2) % 3]);
            }
        }
    }

    let mut hinges = Vec::new();
    for [ea, eb] in seam_edge_pairs(mesh, seams) {
        let key_a = (ea[0].min(ea[1]), ea[0].max(ea[1]));
        let key_b = (eb[0].min(eb[1]), eb[0].max(eb[1]));
        let (Some(&wa), Some(&wb)) = (owner.get(&key_a), owner.get(&key_b)) else {
            continue;
        };
        let m0 = 0.5 * (positions[ea[0] as usize] + positions[eb[0] as usize]);
        let m1 = 0.5 * (positions[ea[1] as usize] + positions[eb[1] as usize]);
        let Some((rest_angle, _)) =
            hinge_angle(m0, m1, positions[wa as usize], positions[wb as usize])
        else {
            continue; // degenerate at start; never spring it
        };
        hinges.push(SeamHinge {
            edges: [ea, eb],
            wings: [wa, wb],
            rest_angle,
        });
    }
    hinges
}

/// Accumulate the elastic + damping hinge forces into `forces`, returning the
/// total elastic energy.
pub fn seam_bend_forces(
    positions: &[Vec3],
    velocities: &[Vec3],
    hinges: &[SeamHinge],
    mat: &SeamMaterial,
    forces: &mut [Vec3],
) -> f64 {
    if mat.bend_stiffness == 0.0 && mat.bend_damping == 0.0 {
        return 0.0;
    }
    let mut energy = 0.0;
    for h in hinges {
        let [ea, eb] = h.edges;
        let m0 = 0.5 * (positions[ea[0] as usize] + positions[eb[0] as usize]);
        let m1 = 0.5 * (positions[ea[1] as usize] + positions[eb[1] as usize]);
        let (wa, wb) = (h.wings[0] as usize, h.wings[1] as usize);
        let Some((theta, grad)) = hinge_angle(m0, m1, positions[wa], positions[wb]) else {
            continue;
        };
        // shortest signed deviation, so wrap-around never torques the long way
        let mut dev = theta - h.rest_angle;
        while dev > std::f64::consts::PI {
            dev -= std::f64::consts::TAU;
        }
        while dev < -std::f64::consts::PI {
            dev += std::f64::consts::TAU;
        }
        energy += 0.5 * mat.bend_stiffness * dev * dev;

        // θ̇ through the same gradients; midpoint velocity = mean of copies
        let vm0 = 0.5 * (velocities[ea[0] as usize] + velocities[eb[0] as usize]);
        let vm1 = 0.5 * (velocities[ea[1] as usize] + velocities[eb[1] as usize]);
        let theta_dot = grad[0].dot(&vm0)
            + grad[1].dot(&vm1)
            + grad[2].dot(&velocities[wa])
            + grad[3].dot(&velocities[wb]);

        let scale = -(mat.bend_stiffness * dev + mat.bend_damping * theta_dot);
        // midpoint forces split between the sewn copies (chain rule of the mean)
        for (k, g) in [(0usize, grad[0]), (1, grad[1])] {
            let half = 0.5 * scale * g;
            forces[ea[k] as usize] += half;
            forces[eb[k] as usize] += half;
        }
        forces[wa] += scale * grad[2];
        forces[wb] += scale * grad[3];
    }
    energy
}
