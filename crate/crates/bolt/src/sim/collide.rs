//! Contact impulses.
//!
//! Cloth-cloth contact works on closest points of triangle pairs — within the
//! garment itself and against frozen lower-layer meshes — and vertex contact
//! against the unified signed distance field. Both use the same impulse
//! recipe: elastic part proportional to penetration, damping on the normal
//! approach speed, Coulomb-clamped friction on the tangential slide.

use crate::mesh::primitive::triangle_triangle_closest;
use crate::sim::state::SimState;
use crate::Vec3;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CollisionParams {
    /// Elastic contact force per cm of penetration.
    pub force_coefficient: f64,
    /// Contact damping on the normal approach speed.
    pub damping_coefficient: f64,
    /// Coulomb ratio: tangential impulse ≤ μ · normal impulse.
    pub friction_coefficient: f64,
    /// Outward expansion applied when collider fields are unioned, cm.
    pub eps_sdf: f64,
    /// Fraction of all velocity removed after contacts each substep.
    pub velocity_damping: f64,
}

impl Default for CollisionParams {
    fn default() -> Self {
        CollisionParams {
            force_coefficient: 2.5e6,
            damping_coefficient: 25.0,
            friction_coefficient: 25.0,
            eps_sdf: 0.2,
            velocity_damping: 0.9,
        }
    }
}

impl CollisionParams {
    pub fn validate(&self) -> crate::Result<()> {
        let nonneg = [
            ("force_coefficient", self.force_coefficient),
            ("damping_coefficient", self.damping_coefficient),
            ("friction_coefficient", self.friction_coefficient),
            ("eps_sdf", self.eps_sdf),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(crate::Error::invalid(name, format!("{v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.velocity_damping) {
            return Err(crate::Error::invalid(
                "velocity_damping",
                format!("{} not in [0, 1]", self.velocity_damping),
            ));
        }
        Ok(())
    }
}

/// Normal and tangential impulse magnitudes for one contact.
///
/// `pen` is the penetration depth, `vn` the relative normal speed (negative
/// when approaching), `vt` the relative tangential speed, and `k_eff` the
/// effective inverse mass of the contact (how much relative velocity one unit
/// of impulse buys). The elastic+damping impulse never pulls, and friction is
/// clamped by both the Coulomb cone and the impulse that would stop the slide.
fn contact_impulse(
    pen: f64,
    vn: f64,
    vt: f64,
    k_eff: f64,
    dt: f64,
    params: &CollisionParams,
) -> (f64, f64) {
    let jn = (dt * (params.force_coefficient * pen - params.damping_coefficient * vn)).max(0.0);
    let mut jt = 0.0;
    if jn > 0.0 && vt > 0.0 && k_eff > 0.0 {
        jt = (params.friction_coefficient * jn).min(vt / k_eff);
    }
    (jn, jt)
}

fn bary_lerp(values: &[Vec3], tri: [u32; 3], b: [f64; 3]) -> Vec3 {
    b[0] * values[tri[0] as usize] + b[1] * values[tri[1] as usize] + b[2] * values[tri[2] as usize]
}

/// Σ bᵢ²/mᵢ over one triangle side; pinned vertices count as infinite mass.
fn side_inv_mass(mass: &[f64], pinned: &[bool], tri: [u32; 3], b: [f64; 3]) -> f64 {
    (0..3)
        .map(|k| {
            let v = tri[k] as usize;
            if pinned[v] {
                0.0
            } else {
                b[k] * b[k] / mass[v]
            }
        })
        .sum()
}

/// Distribute impulse `j` over one triangle side, barycentrically weighted so
/// the side's total momentum changes by exactly `j`.
fn apply_to_side(
    velocities: &mut [Vec3],
    mass: &[f64],
    pinned: &[bool],
    tri: [u32; 3],
    b: [f64; 3],
    j: Vec3,
) {
    for k in 0..3 {
        let v = tri[k] as usize;
        if !pinned[v] {
            velocities[v] += b[k] / mass[v] * j;
        }
    }
}

fn shares_vertex_or_seam(a: [u32; 3], b: [u32; 3], group_of_vertex: &[u32]) -> bool {
    for &va in &a {
        let ga = group_of_vertex[va as usize];
        for &vb in &b {
            if va == vb {
                return true;
            }
            if ga != u32::MAX && ga == group_of_vertex[vb as usize] {
                return true;
            }
        }
    }
    false
}

/// Apply cloth-cloth contact impulses (self-contact, then contact against
/// frozen lower layers) directly to `state.velocities`. Returns the number of
/// contacts that produced an impulse.
///
/// Pairs are processed in sorted order and applied sequentially, so later
/// contacts see earlier corrections and a rerun is bit-identical.
pub fn cloth_cloth_impulses(state: &mut SimState, dt: f64, params: &CollisionParams) -> usize {
    let mut contacts = 0;
    let reach = state.max_thickness();

    let pairs = state.bvh.self_proximity_pairs(&state.mesh, reach);
    for (ta, tb) in pairs {
        let tri_a = state.mesh.triangles[ta as usize];
        let tri_b = state.mesh.triangles[tb as usize];
        if shares_vertex_or_seam(tri_a, tri_b, &state.group_of_vertex) {
            continue;
        }
        let h = panel_thickness(state, ta).max(panel_thickness(state, tb));
        let (d, ba, bb) = triangle_triangle_closest(
            state.mesh.tri_pos(ta as usize),
            state.mesh.tri_pos(tb as usize),
        );
        if d >= h {
            continue;
        }
        let pa = bary_lerp(&state.mesh.positions, tri_a, ba);
        let pb = bary_lerp(&state.mesh.positions, tri_b, bb);
        let n = if d > 1e-9 {
            (pa - pb) / d
        } else {
            // coincident closest points: push apart along A's face normal
            state.mesh.tri_normal(ta as usize)
        };
        let vrel = bary_lerp(&state.velocities, tri_a, ba) - bary_lerp(&state.velocities, tri_b, bb);
        let vn = vrel.dot(&n);
        let vt_vec = vrel - vn * n;
        let vt = vt_vec.norm();
        let k_eff = side_inv_mass(&state.mass, &state.pinned, tri_a, ba)
            + side_inv_mass(&state.mass, &state.pinned, tri_b, bb);
        let (jn, jt) = contact_impulse(h - d, vn, vt, k_eff, dt, params);
        if jn <= 0.0 {
            continue;
        }
        contacts += 1;
        let mut j = jn * n;
        if jt > 0.0 {
            j -= jt / vt * vt_vec;
        }
        apply_to_side(&mut state.velocities, &state.mass, &state.pinned, tri_a, ba, j);
        apply_to_side(&mut state.velocities, &state.mass, &state.pinned, tri_b, bb, -j);
    }

    // frozen lower layers: same contact, immovable other side
    if let Some(collider) = &state.collider {
        for layer in &collider.lower {
            let radius = reach.max(layer.thickness);
            let pairs = state
                .bvh
                .proximity_pairs(&state.mesh, &layer.bvh, &layer.mesh, radius);
            for (ta, tb) in pairs {
                let tri_a = state.mesh.triangles[ta as usize];
                let tri_b = layer.mesh.triangles[tb as usize];
                let h = panel_thickness(state, ta).max(layer.thickness);
                let (d, ba, bb) = triangle_triangle_closest(
                    state.mesh.tri_pos(ta as usize),
                    layer.mesh.tri_pos(tb as usize),
                );
                if d >= h {
                    continue;
                }
                let pa = bary_lerp(&state.mesh.positions, tri_a, ba);
                let pb = bary_lerp(&layer.mesh.positions, tri_b, bb);
                let n = if d > 1e-9 {
                    (pa - pb) / d
                } else {
                    state.mesh.tri_normal(ta as usize)
                };
                let vrel = bary_lerp(&state.velocities, tri_a, ba);
                let vn = vrel.dot(&n);
                let vt_vec = vrel - vn * n;
                let vt = vt_vec.norm();
                let k_eff = side_inv_mass(&state.mass, &state.pinned, tri_a, ba);
                let (jn, jt) = contact_impulse(h - d, vn, vt, k_eff, dt, params);
                if jn <= 0.0 {
                    continue;
                }
                contacts += 1;
                let mut j = jn * n;
                if jt > 0.0 {
                    j -= jt / vt * vt_vec;
                }
                apply_to_side(&mut state.velocities, &state.mass, &state.pinned, tri_a, ba, j);
            }
        }
    }
    contacts
}

fn panel_thickness(state: &SimState, t: u32) -> f64 {
    state
        .materials
        .for_panel(state.rest[t as usize].panel)
        .thickness
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SdfContacts {
    pub count: usize,
    pub max_penetration: f64,
    /// Penetrating vertices whose field gradient vanished (cached normal used).
    pub fallbacks: usize,
}

/// Push penetrating vertices out of the unified field. Vertices with negative
/// field value get an impulse along the sampled gradient; where the gradient
/// vanishes (deep inside coarse cells) the vertex reuses its last good contact
/// normal.
pub fn sdf_impulses(state: &mut SimState, dt: f64, params: &CollisionParams) -> SdfContacts {
    let mut stats = SdfContacts::default();
    let Some(collider) = &state.collider else {
        return stats;
    };
    for v in 0..state.mesh.positions.len() {
        let (value, grad) = collider.sdf.sample(state.mesh.positions[v]);
        if value >= 0.0 {
            continue;
        }
        let depth = -value;
        stats.max_penetration = stats.max_penetration.max(depth);
        if state.pinned[v] {
            continue;
        }
        let gl = grad.norm();
        let n = if gl > 1e-6 {
            let n = grad / gl;
            state.contact_normal[v] = n;
            n
        } else {
            stats.fallbacks += 1;
            state.contact_normal[v]
        };
        let m = state.mass[v];
        let vn = state.velocities[v].dot(&n);
        let jn = (dt * (params.force_coefficient * depth - params.damping_coefficient * vn)).max(0.0);
        if jn <= 0.0 {
            continue;
        }
        stats.count += 1;
        state.velocities[v] += jn / m * n;
        // friction against the static field: clamp by the stopping impulse
        let vt_vec = state.velocities[v] - state.velocities[v].dot(&n) * n;
        let vt = vt_vec.norm();
        if vt > 1e-12 {
            let jt = (params.friction_coefficient * jn).min(m * vt);
            state.velocities[v] -= jt / (m * vt) * vt_vec;
        }
    }
    if stats.fallbacks > 0 {
        log::warn!(
            "{} penetrating vertices had a vanishing field gradient; reused cached normals",
            stats.fallbacks
        );
    }
    stats
}
