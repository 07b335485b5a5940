//! ADMM solver for the pattern layout.
//!
//! The objective splits into a quadratic part (shape frames + pin) and the
//! per-vertex edge-scale terms, coupled through neighbor-vector selectors
//! D_i. The classic alternation applies: the x-update is one sparse SPD
//! solve whose matrix never changes (factored once, two right-hand sides —
//! the x and y components decouple and share the matrix), the z-update is a
//! closed-form proximal fit per scale group, and the duals integrate the
//! constraint gap. Seam-tied groups fit one common scale across all their
//! members, which is what equalizes sewn edge lengths.
//!
//! The edge-energy weight w_i and the consensus penalty ρ_i are deliberately
//! separate: w_i decides where the optimum sits, ρ_i only how fast the
//! alternation gets there.

use super::edges::{group_members, EdgeConstraint};
use super::energy::frame_coeffs;
use crate::{Error, Mat2, Result, Vec2};
use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use rayon::prelude::*;
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct AdmmOptions {
    pub max_iterations: usize,
    /// Relative residual tolerance (primal and dual).
    pub tolerance: f64,
    /// Pin-to-rest weight ε; keeps the x-update matrix positive definite.
    pub pin_epsilon: f64,
    /// Edge-energy weight multiplier: w_i = stiffness · L_i. Sets how hard
    /// edge proportions (and so seam agreement) push back on the frame term.
    pub stiffness: f64,
    /// Consensus penalty multiplier: ρ_i = penalty_factor · L_i. Affects
    /// only the solve path, not the optimum; moderate values converge
    /// fastest.
    pub penalty_factor: f64,
}

impl Default for AdmmOptions {
    fn default() -> Self {
        AdmmOptions {
            max_iterations: 500,
            tolerance: 1e-6,
            pin_epsilon: 1e-8,
            stiffness: 25.0,
            penalty_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdmmOutcome {
    pub positions: Vec<Vec2>,
    pub iterations: usize,
    pub converged: bool,
    /// The run was cut short because the combined residual stopped
    /// improving for 50 consecutive iterations; `positions` holds the best
    /// iterate seen.
    pub stalled: bool,
    /// Relative [primal, dual] residuals per iteration.
    pub residuals: Vec<[f64; 2]>,
}

/// How many consecutive non-improving iterations end the run early.
const STALL_WINDOW: usize = 50;

pub fn admm_optimize(
    rest: &[Vec2],
    triangles: &[[u32; 3]],
    binds: &[Mat2],
    areas: &[f64],
    constraints: &[EdgeConstraint],
    opts: &AdmmOptions,
) -> Result<AdmmOutcome> {
    let n = rest.len();
    assert_eq!(triangles.len(), binds.len());
    assert_eq!(triangles.len(), areas.len());
    if opts.pin_epsilon <= 0.0 {
        return Err(Error::invalid(
            "pattern config",
            "pin epsilon must be positive",
        ));
    }

    // -- assemble the constant x-update system -------------------------------
    // One scalar n×n matrix serves both components: the frame term, the pin
    // and the selector penalties all act on x and y identically.
    let mut h: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut base_rhs = vec![Vec2::zeros(); n];
    for ((tri, bind), &area) in triangles.iter().zip(binds).zip(areas) {
        let c = frame_coeffs(bind);
        for v in 0..3 {
            let iv = tri[v] as usize;
            for w in 0..3 {
                let iw = tri[w] as usize;
                let val = area * (c[v][0] * c[w][0] + c[v][1] * c[w][1]);
                *h.entry((iv, iw)).or_insert(0.0) += val;
            }
            // identity target contributes the linear term A_t · c[v][a]
            base_rhs[iv] += area * Vec2::new(c[v][0], c[v][1]);
        }
    }
    for v in 0..n {
        *h.entry((v, v)).or_insert(0.0) += opts.pin_epsilon;
        base_rhs[v] += opts.pin_epsilon * rest[v];
    }
    let energy_w: Vec<f64> = constraints.iter().map(|c| opts.stiffness * c.l).collect();
    let rho: Vec<f64> = constraints
        .iter()
        .map(|c| opts.penalty_factor * c.l)
        .collect();
    for (c, &r) in constraints.iter().zip(&rho) {
        let v = c.vertex as usize;
        for k in 0..2 {
            let nk = c.neighbors[k] as usize;
            *h.entry((nk, nk)).or_insert(0.0) += r;
            *h.entry((v, v)).or_insert(0.0) += r;
            *h.entry((nk, v)).or_insert(0.0) -= r;
            *h.entry((v, nk)).or_insert(0.0) -= r;
        }
    }
    let triplets: Vec<Triplet<usize, usize, f64>> = h
        .iter()
        .map(|(&(i, j), &val)| Triplet::new(i, j, val))
        .collect();
    let mat = SparseColMat::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::solver("pattern x-update", format!("assembly failed: {e:?}")))?;
    let llt = mat
        .sp_cholesky(faer::Side::Lower)
        .map_err(|e| Error::solver("pattern x-update", format!("factorization failed: {e:?}")))?;

    // -- ADMM state ----------------------------------------------------------
    let groups = group_members(constraints);
    let mut x: Vec<Vec2> = rest.to_vec();
    let mut z: Vec<[Vec2; 2]> = constraints.iter().map(|c| c.current(rest)).collect();
    let mut u: Vec<[Vec2; 2]> = vec![[Vec2::zeros(); 2]; constraints.len()];

    let mut best = f64::INFINITY;
    let mut best_x = x.clone();
    let mut since_best = 0usize;
    let mut residuals = Vec::new();
    let mut converged = false;
    let mut stalled = false;
    let mut iterations = 0;

    for iter in 0..opts.max_iterations {
        iterations = iter + 1;

        // x-update: rhs = base + Σ ρ_i D_iᵀ (z_i − u_i)
        let mut rhs = base_rhs.clone();
        for ((c, &r), (zi, ui)) in constraints.iter().zip(&rho).zip(z.iter().zip(&u)) {
            for k in 0..2 {
                let t = r * (zi[k] - ui[k]);
                rhs[c.neighbors[k] as usize] += t;
                rhs[c.vertex as usize] -= t;
            }
        }
        for comp in 0..2 {
            let mut col = faer::Col::<f64>::from_fn(n, |i| rhs[i][comp]);
            llt.solve_in_place(col.as_mat_mut());
            for (xi, value) in x.iter_mut().zip(col.iter()) {
                xi[comp] = *value;
            }
        }

        // z-update: per scale group, fit one scale, then blend each member
        // between its scaled rest vectors (energy pull, weight w_i) and the
        // consensus target (penalty pull, weight ρ_i). The scale that
        // minimizes the whole group's prox objective reduces to a weighted
        // least-squares fit against the targets with weights wρ/(w+ρ).
        // Groups are independent; members inside a group are processed in
        // index order for reproducibility.
        let updates: Vec<(usize, [Vec2; 2])> = groups
            .par_iter()
            .flat_map_iter(|members| {
                let mut num = 0.0;
                let mut den = 0.0;
                for &i in members {
                    let c = &constraints[i];
                    let (w_e, r) = (energy_w[i], rho[i]);
                    let blend = w_e * r / (w_e + r);
                    let v = c.current(&x);
                    for k in 0..2 {
                        num += blend * (v[k] + u[i][k]).dot(&c.rest[k]);
                        den += blend * c.rest[k].norm_squared();
                    }
                }
                let s = num / den;
                members
                    .iter()
                    .map(|&i| {
                        let c = &constraints[i];
                        let (w_e, r) = (energy_w[i], rho[i]);
                        let v = c.current(&x);
                        let zi = std::array::from_fn(|k| {
                            (w_e * s * c.rest[k] + r * (v[k] + u[i][k])) / (w_e + r)
                        });
                        (i, zi)
                    })
                    .collect::<Vec<_>>()
            })
            .collect();

        let mut r_pri_sq = 0.0;
        let mut r_dual_sq = 0.0;
        let mut dx_norm_sq = 0.0;
        let mut z_norm_sq = 0.0;
        let mut wu_norm_sq = 0.0;
        let mut wz_norm_sq = 0.0;
        for (i, z_new) in updates {
            let c = &constraints[i];
            let r = rho[i];
            let v = c.current(&x);
            for k in 0..2 {
                r_dual_sq += (r * (z_new[k] - z[i][k])).norm_squared();
                let gap = v[k] - z_new[k];
                r_pri_sq += gap.norm_squared();
                u[i][k] += gap;
                wu_norm_sq += (r * u[i][k]).norm_squared();
                wz_norm_sq += (r * z_new[k]).norm_squared();
                dx_norm_sq += v[k].norm_squared();
                z_norm_sq += z_new[k].norm_squared();
            }
            z[i] = z_new;
        }

        let pri_scale = dx_norm_sq.max(z_norm_sq).sqrt().max(1e-30);
        // ‖w∘z‖ keeps the denominator meaningful when the duals are zero
        // (a tension-free problem would otherwise divide noise by noise)
        let dual_scale = wu_norm_sq.max(wz_norm_sq).sqrt().max(1e-30);
        let r_pri = r_pri_sq.sqrt() / pri_scale;
        let r_dual = r_dual_sq.sqrt() / dual_scale;
        residuals.push([r_pri, r_dual]);
        let combined = r_pri.max(r_dual);
        if !combined.is_finite() {
            return Err(Error::solver(
                "pattern admm",
                format!("residual became non-finite at iteration {iterations}"),
            ));
        }

        if combined < best {
            best = combined;
            best_x.copy_from_slice(&x);
            since_best = 0;
        } else {
            since_best += 1;
        }
        if r_pri <= opts.tolerance && r_dual <= opts.tolerance {
            converged = true;
            break;
        }
        if since_best >= STALL_WINDOW {
            log::warn!(
                "pattern admm stalled: no residual improvement in {STALL_WINDOW} iterations \
                 (best {best:.3e}); returning best iterate"
            );
            stalled = true;
            x.copy_from_slice(&best_x);
            break;
        }
    }
    if !converged && !stalled {
        log::warn!(
            "pattern admm hit the iteration cap ({}) at residual {:.3e}; returning best iterate",
            opts.max_iterations,
            best
        );
        x.copy_from_slice(&best_x);
    }

    Ok(AdmmOutcome {
        positions: x,
        iterations,
        converged,
        stalled,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::binding::bind_tangents;
    use crate::pattern::edges::build_edge_constraints;
    use crate::pattern::energy::base_energy;
    use crate::shapes::tube_garment;
    use crate::Vec3;

    #[test]
    fn no_constraints_reduces_to_one_quadratic_solve() {
        let g = tube_garment(Vec3::zeros(), 3.0, 3.0, 5.0, 10, 3, 0);
        let binding = bind_tangents(&g.layout, &g.mesh).unwrap();
        // perturb the binds so the minimum is genuinely away from rest
        let binds: Vec<Mat2> = binding.m.iter().map(|m| m / 1.1).collect();
        let areas: Vec<f64> = g
            .mesh
            .triangles
            .iter()
            .map(|&t| g.layout.signed_area(t))
            .collect();
        let opts = AdmmOptions::default();
        let out = admm_optimize(
            &g.layout.positions,
            &g.mesh.triangles,
            &binds,
            &areas,
            &[],
            &opts,
        )
        .unwrap();
        assert!(
            out.converged,
            "last residuals {:?} after {} iters",
            out.residuals.last(),
            out.iterations
        );
        assert_eq!(out.iterations, 1, "degenerate ADMM: one x-update");
        // the returned layout minimizes the quadratic: gradient vanishes
        let (_, grad) = base_energy(
            &out.positions,
            &g.layout.positions,
            &g.mesh.triangles,
            &binds,
            &areas,
            opts.pin_epsilon,
        );
        let gmax = grad.iter().map(|g| g.norm()).fold(0.0, f64::max);
        assert!(gmax < 1e-9, "gradient at solution: {gmax}");
    }

    #[test]
    fn rest_problem_recovers_original_layout() {
        // frames equal the source frames and constraints sit at rest: the
        // original layout is the exact optimum and must come back unchanged.
        let g = tube_garment(Vec3::zeros(), 4.0, 2.5, 7.0, 14, 4, 0);
        let binding = bind_tangents(&g.layout, &g.mesh).unwrap();
        let areas: Vec<f64> = g
            .mesh
            .triangles
            .iter()
            .map(|&t| g.layout.signed_area(t))
            .collect();
        let constraints = build_edge_constraints(&g.mesh, &g.layout, &g.seams, true).unwrap();
        let out = admm_optimize(
            &g.layout.positions,
            &g.mesh.triangles,
            &binding.m,
            &areas,
            &constraints,
            &AdmmOptions::default(),
        )
        .unwrap();
        assert!(
            out.converged,
            "last residuals {:?} after {} iters",
            out.residuals.last(),
            out.iterations
        );
        let drift = out
            .positions
            .iter()
            .zip(&g.layout.positions)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(drift < 1e-4, "max drift {drift} cm");
    }

    /// Two 10×10 cm panels sewn along facing sides — garment-scale version of
    /// `two_panel_sheet`. Panel 1's binds ask for 1.5× larger triangles, so
    /// only the tied seam scales keep the sewn sides in agreement.
    fn big_seam_fixture() -> (
        crate::mesh::TriMesh3,
        crate::mesh::PatternLayout2D,
        crate::mesh::SeamSpec,
        Vec<Mat2>,
        Vec<f64>,
    ) {
        use crate::mesh::{build_seam_groups, PatternLayout2D, TriMesh3};
        use crate::shapes::patch_xy;
        use crate::Vec2;
        let (mesh_a, lay_a) = patch_xy(Vec3::zeros(), 2, 2, 5.0, 5.0);
        let (mesh_b, lay_b) = patch_xy(Vec3::new(0.0, 0.0, 3.0), 2, 2, 5.0, 5.0);
        let nv = mesh_a.positions.len() as u32;
        let mut positions = mesh_a.positions.clone();
        positions.extend_from_slice(&mesh_b.positions);
        let mut triangles = mesh_a.triangles.clone();
        triangles.extend(mesh_b.triangles.iter().map(|t| t.map(|v| v + nv)));
        let mesh = TriMesh3::new(positions, triangles);
        let mut layout_positions = lay_a.clone();
        layout_positions.extend(lay_b.iter().map(|p| p + Vec2::new(15.0, 0.0)));
        let layout = PatternLayout2D {
            positions: layout_positions,
            panel_of_triangle: vec![0; mesh_a.triangles.len()]
                .into_iter()
                .chain(vec![1; mesh_b.triangles.len()])
                .collect(),
        };
        // panel A's right column (2, 5, 8) onto panel B's left column
        let pairs: Vec<(u32, u32)> = (0..3).map(|j| (3 * j + 2, nv + 3 * j)).collect();
        let seams = build_seam_groups(&pairs, &mesh).unwrap();
        let binding = bind_tangents(&layout, &mesh).unwrap();
        let binds: Vec<Mat2> = binding
            .m
            .iter()
            .enumerate()
            .map(|(t, m)| {
                if layout.panel_of_triangle[t] == 1 {
                    m / 1.5
                } else {
                    *m
                }
            })
            .collect();
        let areas: Vec<f64> = mesh
            .triangles
            .iter()
            .map(|&t| layout.signed_area(t))
            .collect();
        (mesh, layout, seams, binds, areas)
    }

    fn scaled_seam_outcome(
        tolerance: f64,
        max_iterations: usize,
    ) -> (AdmmOutcome, Vec<(u32, u32)>) {
        let (mesh, layout, seams, binds, areas) = big_seam_fixture();
        let constraints = build_edge_constraints(&mesh, &layout, &seams, true).unwrap();
        let out = admm_optimize(
            &layout.positions,
            &mesh.triangles,
            &binds,
            &areas,
            &constraints,
            &AdmmOptions {
                tolerance,
                max_iterations,
                ..AdmmOptions::default()
            },
        )
        .unwrap();
        (out, seams.pairs.clone())
    }

    #[test]
    fn tied_scales_reconcile_sewn_edge_lengths() {
        let (out, _) = scaled_seam_outcome(1e-8, 2000);
        assert!(
            out.converged,
            "last residuals {:?} after {} iters",
            out.residuals.last(),
            out.iterations
        );
        let x = &out.positions;
        let nv = 9u32; // vertices per panel
                       // polyline lengths of the two sewn sides
        let side_a: f64 = (0..2)
            .map(|j| (x[(3 * j + 2) as usize] - x[(3 * j + 5) as usize]).norm())
            .sum();
        let side_b: f64 = (0..2)
            .map(|j| (x[(nv + 3 * j) as usize] - x[(nv + 3 * j + 3) as usize]).norm())
            .sum();
        let rel = (side_a - side_b).abs() / side_a.max(side_b);
        assert!(
            rel < 5e-3,
            "sewn lengths {side_a:.4} vs {side_b:.4} ({rel:.2e})"
        );
        // the disagreement is real: panel 0 wants 10 cm, panel 1 wants 15 cm
        assert!(
            side_a > 10.0 && side_b < 15.0,
            "tie pulls both sides together"
        );
    }

    #[test]
    fn residuals_rarely_increase() {
        let (out, _) = scaled_seam_outcome(1e-10, 2000);
        let combined: Vec<f64> = out.residuals.iter().map(|r| r[0].max(r[1])).collect();
        assert!(
            combined.len() >= 20,
            "want a long run, got {}",
            combined.len()
        );
        let increases = combined
            .windows(2)
            .filter(|w| w[1] > w[0] * (1.0 + 1e-12))
            .count();
        let frac = increases as f64 / combined.len() as f64;
        assert!(
            frac < 0.05,
            "{increases} increases in {} iterations",
            combined.len()
        );
    }
}
