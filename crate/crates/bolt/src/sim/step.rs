//! The explicit substep the draper runs: internal forces, velocity update,
//! contact impulses, global damping, position update, seam projection.

use crate::mesh::{SeamSpec, TriangleBvh};
use crate::sim::bend::bend_force;
use crate::sim::collide::{cloth_cloth_impulses, sdf_impulses, CollisionParams};
use crate::sim::seam_bend::seam_bend_forces;
use crate::sim::state::SimState;
use crate::sim::stretch::stretch_force;
use crate::{Error, Result, Vec3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SimParams {
    /// cm/s².
    pub gravity: [f64; 3],
    /// Seconds per simulated frame.
    pub frame_dt: f64,
    /// Substeps per frame.
    pub substeps: u32,
    /// Apply the global velocity damping every substep; `false` damps once at
    /// the end of each frame instead.
    pub damp_each_substep: bool,
    pub collision: CollisionParams,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            gravity: [0.0, -981.0, 0.0],
            frame_dt: 1.0 / 60.0,
            substeps: 16,
            damp_each_substep: true,
            collision: CollisionParams::default(),
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.frame_dt > 0.0) || !self.frame_dt.is_finite() {
            return Err(Error::invalid("frame_dt", format!("{}", self.frame_dt)));
        }
        if self.substeps == 0 {
            return Err(Error::invalid("substeps", "must be at least 1"));
        }
        self.collision.validate()
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct StepStats {
    pub kinetic_energy: f64,
    pub max_sdf_penetration: f64,
    pub cloth_contacts: usize,
    pub sdf_contacts: usize,
}

/// Snap every seam group to its stored shape: members sit at the group's mean
/// position plus their offset and share the mean velocity.
pub fn enforce_seams(positions: &mut [Vec3], velocities: &mut [Vec3], seams: &SeamSpec) {
    for group in &seams.groups {
        let inv = 1.0 / group.members.len() as f64;
        let mut center = Vec3::zeros();
        let mut vel = Vec3::zeros();
        for &m in &group.members {
            center += positions[m as usize];
            vel += velocities[m as usize];
        }
        center *= inv;
        vel *= inv;
        for (&m, off) in group.members.iter().zip(&group.offsets) {
            positions[m as usize] = center + off;
            velocities[m as usize] = vel;
        }
    }
}

/// One symplectic-Euler substep. Force accumulation, velocity update, contact
/// impulses, damping, position update, seam projection — in that order, all
/// serial, so a rerun is bit-identical.
pub fn step(state: &mut SimState, dt: f64, params: &SimParams) -> Result<StepStats> {
    let nv = state.mesh.positions.len();
    let g = Vec3::new(params.gravity[0], params.gravity[1], params.gravity[2]);
    let mut forces: Vec<Vec3> = state.mass.iter().map(|&m| m * g).collect();

    for t in 0..state.mesh.triangles.len() {
        let r = &state.rest[t];
        let mat = state.materials.for_panel(r.panel);
        let (_, f) = stretch_force(state.mesh.tri_pos(t), &r.inv_edge, r.area, mat);
        let tri = state.mesh.triangles[t];
        for k in 0..3 {
            forces[tri[k] as usize] += f[k];
        }
        let st = &state.stencils[t];
        let (_, bf) = bend_force(
            &state.mesh.positions,
            st,
            &r.inv_edge,
            r.area,
            state.rest_curvature[t],
            mat,
        );
        for (slot, f) in bf.iter().enumerate() {
            forces[st.verts[slot] as usize] += *f;
        }
    }
    seam_bend_forces(
        &state.mesh.positions,
        &state.velocities,
        &state.hinges,
        &state.materials.seam,
        &mut forces,
    );

    for v in 0..nv {
        if !state.pinned[v] {
            state.velocities[v] += dt / state.mass[v] * forces[v];
        }
    }

    state.bvh.refit(&state.mesh);
    if state.bvh.degraded(4.0) {
        state.bvh = TriangleBvh::build(&state.mesh);
    }
    let cloth_contacts = cloth_cloth_impulses(state, dt, &params.collision);
    let sdf = sdf_impulses(state, dt, &params.collision);

    if params.damp_each_substep {
        let keep = 1.0 - params.collision.velocity_damping;
        for v in &mut state.velocities {
            *v *= keep;
        }
    }

    for v in 0..nv {
        if !state.pinned[v] {
            state.mesh.positions[v] += dt * state.velocities[v];
        }
    }

    enforce_seams(&mut state.mesh.positions, &mut state.velocities, &state.seams);

    for (v, p) in state.mesh.positions.iter().enumerate() {
        if !p.iter().all(|c| c.is_finite()) || p.norm() > 1e4 {
            return Err(Error::SimulationDiverged {
                layer: state.layer,
                substep: state.substep_count,
                detail: format!("vertex {v} at ({:.3e}, {:.3e}, {:.3e})", p.x, p.y, p.z),
            });
        }
    }
    state.substep_count += 1;

    Ok(StepStats {
        kinetic_energy: state.kinetic_energy(),
        max_sdf_penetration: sdf.max_penetration,
        cloth_contacts,
        sdf_contacts: sdf.count,
    })
}

/// Run one frame's worth of substeps. Penetration and contact counts report
/// the worst substep; kinetic energy is the end-of-frame value.
pub fn step_frame(state: &mut SimState, params: &SimParams) -> Result<StepStats> {
    let substeps = params.substeps.max(1);
    let dt = params.frame_dt / substeps as f64;
    let mut frame = StepStats::default();
    for _ in 0..substeps {
        let s = step(state, dt, params)?;
        frame.kinetic_energy = s.kinetic_energy;
        frame.max_sdf_penetration = frame.max_sdf_penetration.max(s.max_sdf_penetration);
        frame.cloth_contacts = frame.cloth_contacts.max(s.cloth_contacts);
        frame.sdf_contacts = frame.sdf_contacts.max(s.sdf_contacts);
    }
    if !params.damp_each_substep {
        let keep = 1.0 - params.collision.velocity_damping;
        for v in &mut state.velocities {
            *v *= keep;
        }
        frame.kinetic_energy = state.kinetic_energy();
    }
    Ok(frame)
}
