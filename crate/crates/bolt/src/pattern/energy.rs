//! The pattern optimizer's objective pieces.
//!
//! The shape term drives every triangle's 2D tangent frame toward identity:
//! with the frame expressed through the rebound target binding, the layout's
//! per-triangle frame E₂(x)·bind is linear in the vertex positions, so the
//! term is an exact quadratic. A tiny pin term anchors the global translation.
//! The edge term measures each boundary/seam vertex's neighbor vectors
//! against uniformly scaled rest vectors, with the scale fitted on the fly —
//! pure rescaling of an edge neighborhood costs nothing, shape change does.

use crate::{Error, Mat2, Result, Vec2};

/// Gradient coefficients of the 2D frame w.r.t. the triangle's vertices:
/// F(x)_ab = Σ_v coeff[v][b] · x_{v,a}, identical for both components a.
pub fn frame_coeffs(bind: &Mat2) -> [[f64; 2]; 3] {
    [
        [
            -(bind[(0, 0)] + bind[(1, 0)]),
            -(bind[(0, 1)] + bind[(1, 1)]),
        ],
        [bind[(0, 0)], bind[(0, 1)]],
        [bind[(1, 0)], bind[(1, 1)]],
    ]
}

/// Shape + pin energy and its exact gradient.
///
/// E = ½ Σ_t A_t |E₂(x)·bind_t − I|² + ½ ε Σ_v |x_v − rest_v|²
pub fn base_energy(
    x: &[Vec2],
    rest: &[Vec2],
    triangles: &[[u32; 3]],
    binds: &[Mat2],
    areas: &[f64],
    epsilon: f64,
) -> (f64, Vec<Vec2>) {
    let mut energy = 0.0;
    let mut grad = vec![Vec2::zeros(); x.len()];
    for ((tri, bind), &area) in triangles.iter().zip(binds).zip(areas) {
        let c = frame_coeffs(bind);
        for a in 0..2 {
            for b in 0..2 {
                let target = if a == b { 1.0 } else { 0.0 };
                let f_ab: f64 = (0..3).map(|v| c[v][b] * x[tri[v] as usize][a]).sum();
                let d = f_ab - target;
                energy += 0.5 * area * d * d;
                for v in 0..3 {
                    grad[tri[v] as usize][a] += area * d * c[v][b];
                }
            }
        }
    }
    for (v, (xi, ri)) in x.iter().zip(rest).enumerate() {
        let d = xi - ri;
        energy += 0.5 * epsilon * d.norm_squared();
        grad[v] += epsilon * d;
    }
    (energy, grad)
}

/// Closed-form least-squares scale of an edge neighborhood, the energy at
/// that scale, and the energy's gradient in the neighbor vectors.
///
/// S = (z₀·z₀ʳ + z₁·z₁ʳ) / (|z₀ʳ|² + |z₁ʳ|²)
/// W = ½ L (|z₀ − S z₀ʳ|² + |z₁ − S z₁ʳ|²)
///
/// Because S minimizes W, the gradient through S vanishes and
/// ∂W/∂z_k = L (z_k − S z_kʳ).
pub fn edge_scale_and_energy(
    z: &[Vec2; 2],
    rest: &[Vec2; 2],
    l: f64,
) -> Result<(f64, f64, [Vec2; 2])> {
    let denom = rest[0].norm_squared() + rest[1].norm_squared();
    if denom <= 0.0 {
        return Err(Error::invalid(
            "edge neighborhood",
            "rest vectors are both zero (degenerate boundary vertex)",
        ));
    }
    let s = (z[0].dot(&rest[0]) + z[1].dot(&rest[1])) / denom;
    let d0 = z[0] - s * rest[0];
    let d1 = z[1] - s * rest[1];
    let w = 0.5 * l * (d0.norm_squared() + d1.norm_squared());
    Ok((s, w, [l * d0, l * d1]))
}
