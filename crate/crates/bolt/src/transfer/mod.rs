//! Volumetric displacement-field transfer.
//!
//! The body's source→target motion is extrapolated into a band of cells
//! around the body by a regularized Stokes-style solve: viscosity smooths the
//! field, a compliant pressure discourages volume change, and a unilateral
//! volume bias pushes back where the field compresses (garments should not
//! lose room when a body shrinks locally). Garment vertices ride through the
//! solved field; if the displaced body still misses the target, the whole
//! process restarts from the displaced body.

pub mod grid;
pub mod quadrature;
pub mod system;

pub use grid::{activate_band, SparseDisplacementGrid};
pub use quadrature::{build_boundary_quadrature, BoundaryQuadrature};
pub use system::{assemble_system, solve_schur_cg, TransferSystem};

use crate::mesh::{GarmentSheet, TriMesh3, TriangleBvh};
use crate::{Error, Mat3, Result, Vec3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransferConfig {
    /// Grid cell edge length (cm).
    pub cell_size: f64,
    /// Band half-width around the body surface (cm); widened automatically
    /// when garment vertices fall outside.
    pub band_width: f64,
    pub viscosity: f64,
    /// Pressure compliance γ.
    pub compliance: f64,
    /// Weak boundary penalty; `None` means 1e3·viscosity/cell_size.
    pub boundary_penalty: Option<f64>,
    /// Gauss points per axis in boundary cells (1..=3).
    pub quad_points_per_axis: u32,
    pub cg_tol: f64,
    pub cg_max_iters: u32,
    pub fixed_point_tol: f64,
    pub fixed_point_max_iters: u32,
    /// Acceptable displaced-body vs target gap (cm).
    pub gap_threshold: f64,
    /// Restarts of the whole transfer from the displaced body.
    pub max_restarts: u32,
}

impl Default for TransferConfig {
    fn default() -> Self {
        TransferConfig {
            cell_size: 2.0,
            band_width: 12.0,
            viscosity: 1.0,
            compliance: 0.01,
            boundary_penalty: None,
            quad_points_per_axis: 2,
            cg_tol: 1e-6,
            cg_max_iters: 20_000,
            fixed_point_tol: 1e-4,
            fixed_point_max_iters: 20,
            gap_threshold: 0.5,
            max_restarts: 5,
        }
    }
}

impl TransferConfig {
    pub fn penalty_weight(&self) -> f64 {
        self.boundary_penalty
            .unwrap_or(1e3 * self.viscosity / self.cell_size)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("cell_size", self.cell_size),
            ("band_width", self.band_width),
            ("viscosity", self.viscosity),
            ("compliance", self.compliance),
            ("cg_tol", self.cg_tol),
            ("fixed_point_tol", self.fixed_point_tol),
            ("gap_threshold", self.gap_threshold),
            ("boundary_penalty", self.penalty_weight()),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, format!("{v} (must be positive)")));
            }
        }
        if self.band_width < 2.0 * self.cell_size {
            return Err(Error::invalid(
                "band_width",
                "must be at least twice the cell size",
            ));
        }
        if !(1..=3).contains(&self.quad_points_per_axis) {
            return Err(Error::invalid("quad_points_per_axis", "must be 1..=3"));
        }
        Ok(())
    }
}

/// Per-cell unilateral volume bias: the amount by which the true volume loss
/// 1 − det(∇u + I) exceeds what the linear divergence row already accounts
/// for, clamped at zero. Equals max(0, −(e₂ + e₃)) of the displacement
/// gradient's invariants, so it is second-order small in the strain,
/// continuous, and exactly zero for translations, rotations, and uniform
/// expansions. Gradients are taken at cell centers.
pub fn volume_bias(grid: &SparseDisplacementGrid) -> Vec<f64> {
    let g_center = system::shape_grad_at([0.5, 0.5, 0.5], grid.cell_size);
    grid.cells()
        .map(|cell| {
            let nodes = grid.cell_nodes(cell);
            let mut f = Mat3::identity();
            for j in 0..8 {
                let u = grid.u[nodes[j] as usize];
                for a in 0..3 {
                    for b in 0..3 {
                        f[(a, b)] += u[a] * g_center[j][b];
                    }
                }
            }
            let det = f.determinant();
            let div = f.trace() - 3.0;
            ((1.0 - det) + div).max(0.0)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointOutcome {
    pub iterations: u32,
    pub converged: bool,
    pub last_update: f64,
    pub cg_iterations: Vec<u32>,
}

/// Iterate linear solves with the volume bias recomputed from each solution,
/// writing the final displacement field into `grid.u` and pressure into
/// `grid.p`. Non-convergence within the iteration budget is reported, not
/// fatal; NaNs are.
pub fn fixed_point_solve(
    grid: &mut SparseDisplacementGrid,
    quad: &BoundaryQuadrature,
    cfg: &TransferConfig,
) -> Result<FixedPointOutcome> {
    let vol = grid.cell_size.powi(3);
    let mut bias = vec![0.0f64; grid.cell_count()];
    let mut sys = assemble_system(grid, quad, cfg, &bias)?;
    let mut cg_iterations = Vec::new();
    let mut warm: Option<Vec<f64>> = None;
    let mut last_update = f64::INFINITY;

    for iteration in 1..=cfg.fixed_point_max_iters {
        // only the bias row changes between iterations
        sys.k = bias.iter().map(|b| -vol * b).collect();
        let sol = solve_schur_cg(&sys, cfg, warm.as_deref())?;
        cg_iterations.push(sol.cg_iterations);
        if sol.du.iter().any(|v| !v.is_finite()) {
            return Err(Error::solver(
                "fixed-point",
                format!("non-finite displacement at iteration {iteration}"),
            ));
        }
        last_update = 0.0;
        for (n, u) in grid.u.iter_mut().enumerate() {
            let new = Vec3::new(sol.du[3 * n], sol.du[3 * n + 1], sol.du[3 * n + 2]);
            last_update = last_update.max((new - *u).norm());
            *u = new;
        }
        grid.p.copy_from_slice(&sol.dp);
        warm = Some(sol.du);

        let new_bias = volume_bias(grid);
        let bias_shift = new_bias
            .iter()
            .zip(&bias)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        // A stationary bias means the next solve reproduces this field. A
        // displacement resolved to fixed_point_tol pins det(∇u+I) only to
        // ~tol/cell, so bias shifts below that are solver noise, not signal.
        let bias_floor = cfg.fixed_point_tol / grid.cell_size;
        if bias_shift <= bias_floor || last_update < cfg.fixed_point_tol {
            return Ok(FixedPointOutcome {
                iterations: iteration,
                converged: true,
                last_update,
                cg_iterations,
            });
        }
        // Half-step the bias: the unilateral gate flips cells on and off
        // between iterates, and a full step can bounce between the two states
        // indefinitely. Averaging damps that mode without moving the fixed
        // point itself.
        for (b, n) in bias.iter_mut().zip(&new_bias) {
            *b = 0.5 * (*b + n);
        }
    }
    log::warn!(
        "displacement fixed point: no convergence in {} iterations (last update {last_update:.3e})",
        cfg.fixed_point_max_iters
    );
    Ok(FixedPointOutcome {
        iterations: cfg.fixed_point_max_iters,
        converged: false,
        last_update,
        cg_iterations,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TransferReport {
    pub outer_iterations: u32,
    pub gap_history: Vec<f64>,
    pub final_gap: f64,
    pub solves: Vec<FixedPointOutcome>,
    /// Band actually used, if wider than configured.
    pub widened_band: Option<f64>,
    /// Points that fell outside the band and used clamped sampling.
    pub points_outside_band: usize,
}

pub struct TransferOutcome {
    pub positions: Vec<Vec3>,
    pub displaced_body: TriMesh3,
    pub report: TransferReport,
}

/// Carry a set of points (garment vertices) from the source body to the
/// target body through the displacement field. Restarts from the displaced
/// body until it meets the target within the gap threshold.
pub fn transfer_points(
    points: &[Vec3],
    source_body: &TriMesh3,
    target_body: &TriMesh3,
    cfg: &TransferConfig,
) -> Result<TransferOutcome> {
    cfg.validate()?;
    let bvh = TriangleBvh::build(source_body);
    let mut garment_extent = 0.0f64;
    for p in points {
        garment_extent = garment_extent.max(bvh.closest_point(source_body, *p).distance);
    }
    let mut band = cfg.band_width;
    let mut widened_band = None;
    if garment_extent + cfg.cell_size > band {
        band = garment_extent + 2.0 * cfg.cell_size;
        widened_band = Some(band);
        log::warn!(
            "garment extends {garment_extent:.2} cm from the body; widening band \
             from {} to {band:.2} cm",
            cfg.band_width
        );
    }

    let mut garment = points.to_vec();
    let mut body = source_body.clone();
    body.normals = None;
    let mut gap_history = Vec::new();
    let mut solves = Vec::new();
    let mut points_outside_band = 0usize;

    for _restart in 0..cfg.max_restarts.max(1) {
        let mut grid = activate_band(&body, cfg.cell_size, band)?;
        let quad = build_boundary_quadrature(&grid, &body, target_body, cfg.quad_points_per_axis)?;
        solves.push(fixed_point_solve(&mut grid, &quad, cfg)?);

        for p in &mut garment {
            let (u, inside) = grid.sample_displacement(*p);
            if !inside {
                points_outside_band += 1;
            }
            *p += u;
        }
        let mut gap = 0.0f64;
        for (p, t) in body.positions.iter_mut().zip(&target_body.positions) {
            let (u, _) = grid.sample_displacement(*p);
            *p += u;
            gap = gap.max((*p - t).norm());
        }

        if let Some(&prev) = gap_history.last() {
            if gap >= prev {
                gap_history.push(gap);
                return Err(Error::TransferStalled {
                    history: gap_history,
                });
            }
        }
        gap_history.push(gap);
        if gap <= cfg.gap_threshold {
            break;
        }
    }

    let final_gap = *gap_history.last().unwrap();
    if final_gap > cfg.gap_threshold {
        log::warn!(
            "transfer finished with body gap {final_gap:.3} cm above threshold {} \
             after {} restarts",
            cfg.gap_threshold,
            gap_history.len()
        );
    }
    if points_outside_band > 0 {
        log::warn!("{points_outside_band} transfer samples fell outside the band (clamped)");
    }
    Ok(TransferOutcome {
        positions: garment,
        displaced_body: body,
        report: TransferReport {
            outer_iterations: gap_history.len() as u32,
            final_gap,
            gap_history,
            solves,
            widened_band,
            points_outside_band,
        },
    })
}

/// [`transfer_points`] applied to a garment sheet's 3D vertices.
pub fn transfer_garment(
    garment: &GarmentSheet,
    source_body: &TriMesh3,
    target_body: &TriMesh3,
    cfg: &TransferConfig,
) -> Result<TransferOutcome> {
    transfer_points(&garment.mesh.positions, source_body, target_body, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::uv_sphere;

    fn cfg_small() -> TransferConfig {
        TransferConfig {
            cell_size: 0.5,
            band_width: 1.0,
            ..TransferConfig::default()
        }
    }

    fn ring_points(radius: f64, n: usize) -> Vec<Vec3> {
        (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / n as f64;
                Vec3::new(radius * a.cos(), 0.0, radius * a.sin())
            })
            .collect()
    }

    #[test]
    fn translation_converges_in_one_nonlinear_iteration() {
        let src = uv_sphere(Vec3::zeros(), 2.0, 24, 16);
        let t = Vec3::new(0.4, -0.2, 0.7);
        let mut dst = src.clone();
        for p in &mut dst.positions {
            *p += t;
        }
        let cfg = cfg_small();
        let mut grid = activate_band(&src, cfg.cell_size, cfg.band_width).unwrap();
        let quad = build_boundary_quadrature(&grid, &src, &dst, 2).unwrap();
        let out = fixed_point_solve(&mut grid, &quad, &cfg).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 1, "rigid translation needs one iteration");
        // field near the surface carries the translation
        let (u, inside) = grid.sample_displacement(Vec3::new(2.2, 0.0, 0.0));
        assert!(inside);
        assert!((u - t).norm() < 1e-3, "sampled {u:?}");
        // bias stays below the sub-resolution floor (tol / cell = 2e-4 here)
        let bias = volume_bias(&grid);
        let max_bias = bias.iter().fold(0.0f64, |m, &b| m.max(b));
        assert!(max_bias <= 2e-4, "translation bias {max_bias:.3e}");
    }

    #[test]
    fn expansion_field_has_exactly_zero_bias() {
        let src = uv_sphere(Vec3::zeros(), 2.0, 24, 16);
        let cfg = cfg_small();
        let mut grid = activate_band(&src, cfg.cell_size, cfg.band_width).unwrap();
        // u = 0.1 x is a uniform expansion: det(∇u + I) = 1.1³ > 1 everywhere,
        // so the bias must vanish identically, not just approximately.
        for i in 0..grid.node_count() {
            grid.u[i] = 0.1 * grid.node_pos(i as u32);
        }
        let bias = volume_bias(&grid);
        assert!(
            bias.iter().all(|&b| b == 0.0),
            "expansion bias must be exactly zero"
        );
    }

    #[test]
    fn shrink_triggers_compression_bias() {
        let src = uv_sphere(Vec3::zeros(), 2.0, 24, 16);
        let cfg = cfg_small();
        let mut shrunk = src.clone();
        for p in &mut shrunk.positions {
            *p *= 0.9;
        }
        let mut grid = activate_band(&src, cfg.cell_size, cfg.band_width).unwrap();
        let quad = build_boundary_quadrature(&grid, &src, &shrunk, 2).unwrap();
        fixed_point_solve(&mut grid, &quad, &cfg).unwrap();
        // the solved field compresses somewhere in the band (det < 1), which
        // is exactly the set where the unilateral bias switches on
        let bias = volume_bias(&grid);
        assert!(
            bias.iter().any(|&b| b > 0.0),
            "shrink must trigger the bias"
        );
    }

    // max deviation between the converged fixed point and one linear solve
    fn expansion_nonlinear_correction(scale: f64) -> f64 {
        let src = uv_sphere(Vec3::zeros(), 2.0, 24, 16);
        let cfg = cfg_small();
        let mut grown = src.clone();
        for p in &mut grown.positions {
            *p *= scale;
        }
        let grid = activate_band(&src, cfg.cell_size, cfg.band_width).unwrap();
        let quad = build_boundary_quadrature(&grid, &src, &grown, 2).unwrap();

        let zero_bias = vec![0.0; grid.cell_count()];
        let sys = assemble_system(&grid, &quad, &cfg, &zero_bias).unwrap();
        let linear = solve_schur_cg(&sys, &cfg, None).unwrap();

        let mut grid = activate_band(&src, cfg.cell_size, cfg.band_width).unwrap();
        let out = fixed_point_solve(&mut grid, &quad, &cfg).unwrap();
        assert!(out.converged, "expansion fixed point converged at {scale}x");

        let mut diff = 0.0f64;
        for (n, u) in grid.u.iter().enumerate() {
            let lin = Vec3::new(linear.du[3 * n], linear.du[3 * n + 1], linear.du[3 * n + 2]);
            diff = diff.max((u - lin).norm());
        }
        diff
    }

    #[test]
    fn expansion_stays_close_to_single_linear_solve() {
        // the unilateral bias is second order in the strain, so the nonlinear
        // solve should track the linear one, and the gap should shrink
        // quadratically as the expansion gets milder
        let d10 = expansion_nonlinear_correction(1.10);
        let d1 = expansion_nonlinear_correction(1.01);
        assert!(
            d10 <= 2.5e-2,
            "10% expansion moved {d10:.3e} from the linear solve"
        );
        assert!(
            d1 <= d10 / 25.0,
            "correction not second order: d10={d10:.3e} d1={d1:.3e}"
        );
    }

    #[test]
    fn identity_transfer_leaves_garment_in_place() {
        let src = uv_sphere(Vec3::zeros(), 2.0, 24, 16);
        let garment = ring_points(2.4, 16);
        let out = transfer_points(&garment, &src, &src.clone(), &cfg_small()).unwrap();
        for (a, b) in garment.iter().zip(&out.positions) {
            assert!((a - b).norm() < 1e-6);
        }
        assert_eq!(out.report.outer_iterations, 1);
    }

    #[test]
    fn rigid_translation_moves_garment_rigidly() {
        let src = uv_sphere(Vec3::zeros(), 2.0, 24, 16);
        let t = Vec3::new(0.5, 0.3, -0.2);
        let mut dst = src.clone();
        for p in &mut dst.positions {
            *p += t;
        }
        let garment = ring_points(2.3, 16);
        let out = transfer_points(&garment, &src, &dst, &cfg_small()).unwrap();
        for (a, b) in garment.iter().zip(&out.positions) {
            assert!(
                ((a + t) - b).norm() < 1e-3,
                "expected {:?}, got {b:?}",
                a + t
            );
        }
    }

    #[test]
    fn sphere_to_ellipsoid_closes_the_gap() {
        let src = uv_sphere(Vec3::zeros(), 2.0, 24, 16);
        let mut dst = src.clone();
        for p in &mut dst.positions {
            p.x *= 1.2;
            p.y *= 0.9;
            p.z *= 1.1;
        }
        let cfg = TransferConfig {
            gap_threshold: 0.02,
            ..cfg_small()
        };
        let garment = ring_points(2.4, 24);
        let out = transfer_points(&garment, &src, &dst, &cfg).unwrap();
        assert!(
            out.report.final_gap <= cfg.gap_threshold,
            "gap history {:?}",
            out.report.gap_history
        );
        assert!(out.report.outer_iterations <= 5);
        // gaps strictly decrease across restarts
        for w in out.report.gap_history.windows(2) {
            assert!(w[1] < w[0]);
        }
        // the displaced body should be near the ellipsoid
        for (p, t) in out.displaced_body.positions.iter().zip(&dst.positions) {
            assert!((p - t).norm() <= cfg.gap_threshold + 1e-9);
        }
    }

    #[test]
    fn garment_outside_band_widens_it() {
        let src = uv_sphere(Vec3::zeros(), 2.0, 16, 12);
        let garment = ring_points(4.5, 8); // 2.5 cm off a 2 cm-band body
        let out = transfer_points(&garment, &src, &src.clone(), &cfg_small()).unwrap();
        assert!(out.report.widened_band.is_some());
    }

    #[test]
    fn config_validation() {
        assert!(TransferConfig::default().validate().is_ok());
        let bad = TransferConfig {
            band_width: 1.0,
            cell_size: 2.0,
            ..TransferConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TransferConfig {
            compliance: 0.0,
            ..TransferConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
