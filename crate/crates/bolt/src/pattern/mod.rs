//! 2D sewing-pattern re-optimization after a garment has been carried to a
//! new body.
//!
//! The carried 3D mesh dictates what each triangle should look like in the
//! plane: its tangent frame is measured, split into rotation and stretch,
//! optionally swapped with the authored stretch (so the garment keeps its
//! original fit), and rebound to the carried triangle. An ADMM solve then
//! re-lays-out every panel so triangles match their target frames while
//! boundary and seam vertices keep their edge proportions — vertices sewn
//! together share one scale factor, which keeps both sides of every seam the
//! same length. A final Dirichlet pass smooths panel interiors against the
//! authored pattern, and any triangle that ends up inverted is reported as
//! an error.

pub mod admm;
pub mod binding;
pub mod edges;
pub mod energy;
pub mod frames;
pub mod report;
pub mod tidy;

pub use admm::{admm_optimize, AdmmOptions, AdmmOutcome};
pub use binding::{bind_tangents, TangentBinding};
pub use edges::{build_edge_constraints, EdgeConstraint};
pub use energy::{base_energy, edge_scale_and_energy};
pub use frames::{build_target_frames, polar_3x2, FitMode, TargetFrame};
pub use report::{pattern_svg, seam_length_deltas, SeamLengthDelta};
pub use tidy::dirichlet_tidy;

use crate::mesh::GarmentSheet;
use crate::{Error, Mat2, Result, Vec2, Vec3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatternConfig {
    /// What to keep from the carried garment: orientation only (`loose`) or
    /// orientation plus the authored worn stretch (`preserve_fit`).
    pub mode: FitMode,
    /// Pin-to-rest weight ε anchoring each panel's free translation.
    pub pin_epsilon: f64,
    /// Edge-term stiffness; the per-vertex weight is this times L_i (half
    /// the vertex's summed rest edge lengths). Larger values hold seam and
    /// border proportions more tightly against the frame term; the default
    /// keeps sewn sides well within 0.5% of each other on panels that
    /// disagree by half their size.
    pub edge_stiffness: f64,
    pub max_iterations: usize,
    /// Relative primal/dual residual tolerance for the ADMM loop.
    pub tolerance: f64,
    /// Also constrain sewn vertices that lie inside a panel (internal seam
    /// lines), not just panel borders.
    pub include_internal_seams: bool,
}

impl Default for PatternConfig {
    fn default() -> Self {
        PatternConfig {
            mode: FitMode::PreserveFit,
            pin_epsilon: 1e-8,
            edge_stiffness: 25.0,
            max_iterations: 500,
            tolerance: 1e-6,
            include_internal_seams: true,
        }
    }
}

impl PatternConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pin_epsilon > 0.0) {
            return Err(Error::invalid("pattern config", "pin_epsilon must be > 0"));
        }
        if !(self.edge_stiffness >= 0.0) {
            return Err(Error::invalid(
                "pattern config",
                "edge_stiffness must be ≥ 0",
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid(
                "pattern config",
                "max_iterations must be ≥ 1",
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("pattern config", "tolerance must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PatternReport {
    pub mode: FitMode,
    pub iterations: usize,
    pub converged: bool,
    pub stalled: bool,
    /// Relative [primal, dual] residuals per ADMM iteration.
    pub residuals: Vec<[f64; 2]>,
    /// Summed sewn-edge lengths per panel pair, before and after.
    pub seams: Vec<SeamLengthDelta>,
    /// Largest vertex move from the authored layout (cm).
    pub max_drift: f64,
}

#[derive(Debug, Clone)]
pub struct PatternOutcome {
    /// Optimized 2D positions, one per mesh vertex.
    pub layout: Vec<Vec2>,
    pub report: PatternReport,
}

/// Panel layout re-optimization end to end: frames from the carried mesh,
/// ADMM, boundary-pinned Dirichlet tidy, orientation check, report.
pub fn optimize_pattern(
    sheet: &GarmentSheet,
    carried: &[Vec3],
    cfg: &PatternConfig,
) -> Result<PatternOutcome> {
    cfg.validate()?;
    let n = sheet.mesh.positions.len();
    if carried.len() != n {
        return Err(Error::invalid(
            "carried mesh",
            format!("{} positions for a {}-vertex garment", carried.len(), n),
        ));
    }

    let binding = bind_tangents(&sheet.layout, &sheet.mesh)?;
    let frames = build_target_frames(
        &binding,
        &sheet.mesh.positions,
        carried,
        &sheet.mesh.triangles,
        cfg.mode,
    )?;
    let binds: Vec<Mat2> = frames.iter().map(|f| f.bind).collect();
    let areas: Vec<f64> = sheet
        .mesh
        .triangles
        .iter()
        .map(|&t| sheet.layout.signed_area(t))
        .collect();
    let constraints = build_edge_constraints(
        &sheet.mesh,
        &sheet.layout,
        &sheet.seams,
        cfg.include_internal_seams,
    )?;
    let opts = AdmmOptions {
        max_iterations: cfg.max_iterations,
        tolerance: cfg.tolerance,
        pin_epsilon: cfg.pin_epsilon,
        stiffness: cfg.edge_stiffness,
        ..AdmmOptions::default()
    };
    let out = admm_optimize(
        &sheet.layout.positions,
        &sheet.mesh.triangles,
        &binds,
        &areas,
        &constraints,
        &opts,
    )?;

    let mut layout = out.positions;
    let mut pinned = vec![false; n];
    for (a, b) in sheet.mesh.boundary_edges() {
        pinned[a as usize] = true;
        pinned[b as usize] = true;
    }
    for v in sheet.seams.sewn_vertices() {
        pinned[v as usize] = true;
    }
    dirichlet_tidy(&sheet.mesh, &sheet.layout.positions, &pinned, &mut layout)?;
    check_orientation(&sheet.mesh.triangles, &layout)?;

    let max_drift = layout
        .iter()
        .zip(&sheet.layout.positions)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let report = PatternReport {
        mode: cfg.mode,
        iterations: out.iterations,
        converged: out.converged,
        stalled: out.stalled,
        residuals: out.residuals,
        seams: seam_length_deltas(sheet, &layout),
        max_drift,
    };
    Ok(PatternOutcome { layout, report })
}

/// Every triangle of the final layout must keep its positive orientation;
/// inversions mean the optimizer folded the pattern over itself.
fn check_orientation(triangles: &[[u32; 3]], layout: &[Vec2]) -> Result<()> {
    let flipped: Vec<usize> = triangles
        .iter()
        .enumerate()
        .filter(|(_, tri)| {
            let a = layout[tri[0] as usize];
            let b = layout[tri[1] as usize];
            let c = layout[tri[2] as usize];
            (b - a).perp(&(c - a)) <= 0.0
        })
        .map(|(t, _)| t)
        .collect();
    if flipped.is_empty() {
        Ok(())
    } else {
        Err(Error::invalid(
            "pattern layout",
            format!(
                "{} flipped triangle(s) after optimization, first at index {}",
                flipped.len(),
                flipped[0]
            ),
        ))
    }
}
