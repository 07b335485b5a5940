//! Assembly of the displacement/pressure block system and its Schur solve.
//!
//! Unknowns: 3 displacement components per grid node (dof `3·node + axis`)
//! and one pressure per cell. The blocks are
//!   A — viscosity form 2ν·D(u):D(v) plus boundary penalty mass terms (SPD),
//!   B — discrete divergence (one row per cell),
//!   C — pressure compliance, γ·cell_volume on the diagonal.
//! The displacement update solves the Schur complement
//!   (A + BᵀC⁻¹B) Δu = f − BᵀC⁻¹k,  Δp = C⁻¹(k − B·Δu).

use super::grid::{SparseDisplacementGrid, CELL_CORNERS};
use super::quadrature::{gauss_1d, BoundaryQuadrature};
use super::TransferConfig;
use crate::math::{conjugate_gradient, Csr};
use crate::{Error, Result};

/// Trilinear shape values at local coordinates `t ∈ [0,1]³`.
pub fn shape_at(t: [f64; 3]) -> [f64; 8] {
    let mut n = [0.0f64; 8];
    for (k, d) in CELL_CORNERS.iter().enumerate() {
        n[k] = (0..3)
            .map(|a| if d[a] == 1 { t[a] } else { 1.0 - t[a] })
            .product();
    }
    n
}

/// World-space shape gradients at local coordinates, for cell size `h`.
pub fn shape_grad_at(t: [f64; 3], h: f64) -> [[f64; 3]; 8] {
    let mut g = [[0.0f64; 3]; 8];
    for (k, d) in CELL_CORNERS.iter().enumerate() {
        for a in 0..3 {
            let mut v = if d[a] == 1 { 1.0 } else { -1.0 };
            for b in 0..3 {
                if b != a {
                    v *= if d[b] == 1 { t[b] } else { 1.0 - t[b] };
                }
            }
            g[k][a] = v / h;
        }
    }
    g
}

pub struct TransferSystem {
    pub a: Csr,
    pub b: Csr,
    pub c_diag: Vec<f64>,
    pub f: Vec<f64>,
    pub k: Vec<f64>,
}

/// The 2×2×2 volume rule used for the viscosity and divergence integrals.
fn volume_rule() -> Vec<([f64; 3], f64)> {
    let g = gauss_1d(2).unwrap();
    let mut out = Vec::with_capacity(8);
    for &(tx, wx) in &g {
        for &(ty, wy) in &g {
            for &(tz, wz) in &g {
                out.push(([tx, ty, tz], wx * wy * wz));
            }
        }
    }
    out
}

/// Build {A, B, C, f, k} for the current bias.
///
/// `bias` is the per-cell unilateral volume term b ≥ 0 (positive where the
/// previous iterate compresses). It enters the pressure row as
/// k = −cell_volume·b: with the Schur right-hand side f − BᵀC⁻¹k this adds a
/// volume source in compressed cells, pushing the field back toward
/// det(∇u+I) ≥ 1.
pub fn assemble_system(
    grid: &SparseDisplacementGrid,
    quad: &BoundaryQuadrature,
    cfg: &TransferConfig,
    bias: &[f64],
) -> Result<TransferSystem> {
    if bias.len() != grid.cell_count() {
        return Err(Error::invalid(
            "bias",
            format!("{} values for {} cells", bias.len(), grid.cell_count()),
        ));
    }
    if quad.points.is_empty() {
        return Err(Error::solver(
            "transfer assembly",
            "no cells intersect the body surface; \
             reduce cell size or widen the band so the boundary is sampled",
        ));
    }
    let h = grid.cell_size;
    let vol = h * h * h;
    let nu = cfg.viscosity;
    let ndof = 3 * grid.node_count();
    let ncells = grid.cell_count();

    // element matrices are identical for every cell of a uniform cubic grid
    let rule = volume_rule();
    let mut ke = [[0.0f64; 24]; 24];
    let mut div_stencil = [[0.0f64; 3]; 8];
    for &(t, w) in &rule {
        let wq = w * vol;
        let g = shape_grad_at(t, h);
        for i in 0..8 {
            for j in 0..8 {
                let gg: f64 = (0..3).map(|a| g[i][a] * g[j][a]).sum();
                for a in 0..3 {
                    for b in 0..3 {
                        let mut v = g[j][a] * g[i][b];
                        if a == b {
                            v += gg;
                        }
                        ke[3 * i + a][3 * j + b] += wq * nu * v;
                    }
                }
            }
        }
        for j in 0..8 {
            for b in 0..3 {
                div_stencil[j][b] += wq * g[j][b];
            }
        }
    }

    let mut a_triplets: Vec<(u32, u32, f64)> =
        Vec::with_capacity(ncells * 576 + quad.points.len() * 192);
    let mut b_triplets: Vec<(u32, u32, f64)> = Vec::with_capacity(ncells * 24);
    for cell in grid.cells() {
        let nodes = grid.cell_nodes(cell);
        for i in 0..8 {
            for a in 0..3 {
                let row = 3 * nodes[i] + a as u32;
                for j in 0..8 {
                    for b in 0..3 {
                        let v = ke[3 * i + a][3 * j + b];
                        if v != 0.0 {
                            a_triplets.push((row, 3 * nodes[j] + b as u32, v));
                        }
                    }
                }
            }
        }
        for j in 0..8 {
            for b in 0..3 {
                b_triplets.push((cell, 3 * nodes[j] + b as u32, div_stencil[j][b]));
            }
        }
    }

    let beta = cfg.penalty_weight();
    let mut f = vec![0.0f64; ndof];
    for p in &quad.points {
        let nodes = grid.cell_nodes(p.cell);
        let s = beta * p.weight;
        for i in 0..8 {
            let ni = p.trilinear[i];
            if ni == 0.0 {
                continue;
            }
            for j in 0..8 {
                // s·(ni·nj): the commuted product is bitwise identical for
                // the (j,i) entry, keeping A exactly symmetric
                let v = s * (ni * p.trilinear[j]);
                if v != 0.0 {
                    for a in 0..3 {
                        a_triplets.push((3 * nodes[i] + a, 3 * nodes[j] + a, v));
                    }
                }
            }
            for a in 0..3 {
                f[(3 * nodes[i] + a) as usize] += s * ni * p.prescribed[a as usize];
            }
        }
    }

    let k = bias.iter().map(|b| -vol * b).collect();
    Ok(TransferSystem {
        a: Csr::from_triplets(ndof, ndof, &a_triplets),
        b: Csr::from_triplets(ncells, ndof, &b_triplets),
        c_diag: vec![cfg.compliance * vol; ncells],
        f,
        k,
    })
}

/// Discrete energy whose gradient is `A·u − f`, evaluated independently of the
/// assembled matrices (direct quadrature over cells and boundary points).
/// Used by tests to cross-check the assembly.
pub fn system_energy(
    grid: &SparseDisplacementGrid,
    quad: &BoundaryQuadrature,
    cfg: &TransferConfig,
    u: &[f64],
) -> f64 {
    let h = grid.cell_size;
    let vol = h * h * h;
    let rule = volume_rule();
    let mut e = 0.0;
    for cell in grid.cells() {
        let nodes = grid.cell_nodes(cell);
        for &(t, w) in &rule {
            let g = shape_grad_at(t, h);
            // grad[a][b] = ∂u_a/∂x_b
            let mut grad = [[0.0f64; 3]; 3];
            for j in 0..8 {
                for a in 0..3 {
                    let uj = u[(3 * nodes[j] + a as u32) as usize];
                    for b in 0..3 {
                        grad[a][b] += uj * g[j][b];
                    }
                }
            }
            let mut d2 = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    let d = 0.5 * (grad[a][b] + grad[b][a]);
                    d2 += d * d;
                }
            }
            e += w * vol * cfg.viscosity * d2;
        }
    }
    let beta = cfg.penalty_weight();
    for p in &quad.points {
        let nodes = grid.cell_nodes(p.cell);
        let mut mismatch2 = 0.0;
        for a in 0..3 {
            let mut ua = 0.0;
            for j in 0..8 {
                ua += p.trilinear[j] * u[(3 * nodes[j] + a as u32) as usize];
            }
            let d = ua - p.prescribed[a as usize];
            mismatch2 += d * d;
        }
        e += 0.5 * beta * p.weight * mismatch2;
    }
    e
}

pub struct SchurSolution {
    pub du: Vec<f64>,
    pub dp: Vec<f64>,
    pub cg_iterations: u32,
    pub residual: f64,
}

/// Solve the Schur-reduced system by conjugate gradient.
/// `warm_start`, if given, seeds the CG iteration.
pub fn solve_schur_cg(
    sys: &TransferSystem,
    cfg: &TransferConfig,
    warm_start: Option<&[f64]>,
) -> Result<SchurSolution> {
    let ndof = sys.a.nrows();
    let ncells = sys.c_diag.len();
    if sys.c_diag.iter().any(|&c| !(c > 0.0)) {
        return Err(Error::solver(
            "schur",
            "pressure compliance must be positive",
        ));
    }

    // rhs = f − Bᵀ C⁻¹ k
    let mut rhs = sys.f.clone();
    let neg_ck: Vec<f64> = sys.k.iter().zip(&sys.c_diag).map(|(k, c)| -k / c).collect();
    sys.b.tr_mul_vec_add(&neg_ck, &mut rhs);

    let apply = |x: &[f64], y: &mut [f64]| {
        sys.a.mul_vec(x, y);
        let mut bx = vec![0.0; ncells];
        sys.b.mul_vec(x, &mut bx);
        for (v, c) in bx.iter_mut().zip(&sys.c_diag) {
            *v /= c;
        }
        sys.b.tr_mul_vec_add(&bx, y);
    };

    let mut du = match warm_start {
        Some(w) if w.len() == ndof => w.to_vec(),
        _ => vec![0.0; ndof],
    };
    let out = conjugate_gradient(apply, &rhs, &mut du, cfg.cg_tol, cfg.cg_max_iters);
    if !out.converged {
        return Err(Error::solver(
            "schur",
            format!(
                "CG stalled at relative residual {:.3e} after {} iterations",
                out.relative_residual, out.iterations
            ),
        ));
    }

    // Δp = C⁻¹ (k − B Δu)
    let mut bdu = vec![0.0; ncells];
    sys.b.mul_vec(&du, &mut bdu);
    let dp = sys
        .k
        .iter()
        .zip(&bdu)
        .zip(&sys.c_diag)
        .map(|((k, b), c)| (k - b) / c)
        .collect();
    Ok(SchurSolution {
        du,
        dp,
        cg_iterations: out.iterations,
        residual: out.relative_residual,
    })
}
