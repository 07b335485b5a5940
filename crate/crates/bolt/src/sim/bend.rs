//! Bending through a per-triangle curvature matrix in the warp/weft frame.
//!
//! Each triangle gets a mid-edge normal per edge (average of its own and its
//! neighbor's unit normal; its own on boundaries). An affine normal field
//! through the three 2D edge midpoints has a constant Jacobian G, and
//! `S = Fᵀ·G` is the curvature matrix expressed in pattern coordinates:
//! `S[0][0]` bends around the warp axis, `S[1][1]` around the weft, and the
//! symmetrized off-diagonal carries the twist. Penalties act on `S - Sʳ`.
//!
//! Forces come from dual-number differentiation of the energy over the full
//! six-vertex stencil (triangle plus the three opposite wing vertices), so
//! they are exact gradients of the stated energy.

use crate::math::dual::{add3, cross3, dot3, normalize3, scale3, sub3, Dual, Real, V3};
use crate::sim::material::PanelMaterial;
use crate::{Mat2, Vec3};

/// Differentiation stencil of one triangle: its vertices, then the opposite
/// (wing) vertex of the neighbor across each edge, `verts[3 + k]` for the
/// edge from `verts[k]` to `verts[(k+1) % 3]`. Absent neighbors are flagged
/// off in `present` and their slot is ignored.
#[derive(Debug, Clone, Copy)]
pub struct BendStencil {
    pub verts: [u32; 6],
    pub present: [bool; 3],
}

/// One stencil per triangle, from the mesh adjacency.
pub fn bend_stencils(triangles: &[[u32; 3]], neighbors: &[[Option<u32>; 3]]) -> Vec<BendStencil> {
    triangles
        .iter()
        .zip(neighbors)
        .map(|(tri, nbs)| {
            let mut verts = [tri[0], tri[1], tri[2], 0, 0, 0];
            let mut present = [false; 3];
            for k in 0..3 {
                if let Some(nt) = nbs[k] {
                    let (a, b) = (tri[k], tri[(k + 1) % 3]);
                    let other = triangles[nt as usize];
                    let wing = other.into_iter().find(|&v| v != a && v != b);
                    if let Some(w) = wing {
                        verts[3 + k] = w;
                        present[k] = true;
                    }
                }
            }
            BendStencil { verts, present }
        })
        .collect()
}

/// `[S00, S11, (S01 + S10) / 2]` for one stencil, generic over the scalar so
/// the same expression yields values and exact derivatives.
fn curvature_impl<S: Real>(xs: &[V3<S>; 6], present: [bool; 3], inv_edge: &Mat2) -> Option<[S; 3]> {
    let d1 = sub3(xs[1], xs[0]);
    let d2 = sub3(xs[2], xs[0]);
    let raw = cross3(d1, d2);
    if dot3(raw, raw).value() < 1e-24 {
        return None; // collapsed in flight; contributes nothing this step
    }
    let n_t = normalize3(raw);

    let mut mid = [n_t; 3];
    for k in 0..3 {
        if !present[k] {
            continue;
        }
        let a = xs[k];
        let b = xs[(k + 1) % 3];
        let w = xs[3 + k];
        // neighbor runs the shared edge backwards in a consistent orientation
        let raw_n = cross3(sub3(a, b), sub3(w, b));
        if dot3(raw_n, raw_n).value() < 1e-24 {
            continue;
        }
        let sum = add3(n_t, normalize3(raw_n));
        if dot3(sum, sum).value() < 1e-12 {
            continue; // fold-over; no meaningful average direction
        }
        mid[k] = normalize3(sum);
    }

    // G·[e1 e2] = [2(ñ1-ñ2), 2(ñ1-ñ0)]  (from the midpoint interpolation)
    let two = S::constant(2.0);
    let c0 = scale3(sub3(mid[1], mid[2]), two);
    let c1 = scale3(sub3(mid[1], mid[0]), two);
    let gx = add3(
        scale3(c0, S::constant(inv_edge[(0, 0)])),
        scale3(c1, S::constant(inv_edge[(1, 0)])),
    );
    let gy = add3(
        scale3(c0, S::constant(inv_edge[(0, 1)])),
        scale3(c1, S::constant(inv_edge[(1, 1)])),
    );
    let tx = add3(
        scale3(d1, S::constant(inv_edge[(0, 0)])),
        scale3(d2, S::constant(inv_edge[(1, 0)])),
    );
    let ty = add3(
        scale3(d1, S::constant(inv_edge[(0, 1)])),
        scale3(d2, S::constant(inv_edge[(1, 1)])),
    );

    let s00 = dot3(tx, gx);
    let s11 = dot3(ty, gy);
    let off = (dot3(tx, gy) + dot3(ty, gx)) * S::constant(0.5);
    Some([s00, s11, off])
}

/// Curvature entries at the current positions (1/cm).
pub fn curvature(positions: &[Vec3], st: &BendStencil, inv_edge: &Mat2) -> [f64; 3] {
    let mut xs = [[0.0f64; 3]; 6];
    for (slot, v) in st.verts.iter().enumerate() {
        let p = positions[*v as usize];
        xs[slot] = [p.x, p.y, p.z];
    }
    curvature_impl(&xs, st.present, inv_edge).unwrap_or([0.0; 3])
}

fn energy_of<S: Real>(s: [S; 3], rest: [f64; 3], area: f64, mat: &PanelMaterial) -> S {
    let d0 = s[0] - S::constant(rest[0]);
    let d1 = s[1] - S::constant(rest[1]);
    let d2 = s[2] - S::constant(rest[2]);
    (d0 * d0 * S::constant(mat.bend_warp)
        + d1 * d1 * S::constant(mat.bend_weft)
        + d2 * d2 * S::constant(mat.bend_shear))
        * S::constant(0.5 * area)
}

/// Energy and exact per-stencil-vertex forces (`-∂E/∂x`). Slots whose
/// neighbor is absent get zero force.
pub fn bend_force(
    positions: &[Vec3],
    st: &BendStencil,
    inv_edge: &Mat2,
    area: f64,
    rest: [f64; 3],
    mat: &PanelMaterial,
) -> (f64, [Vec3; 6]) {
    let mut xs = [[Dual::<18>::constant(0.0); 3]; 6];
    for (slot, v) in st.verts.iter().enumerate() {
        let p = positions[*v as usize];
        for a in 0..3 {
            xs[slot][a] = Dual::variable(p[a], 3 * slot + a);
        }
    }
    let Some(s) = curvature_impl(&xs, st.present, inv_edge) else {
        return (0.0, [Vec3::zeros(); 6]);
    };
    let e = energy_of(s, rest, area, mat);
    let mut forces = [Vec3::zeros(); 6];
    for slot in 0..6 {
        for a in 0..3 {
            forces[slot][a] = -e.eps[3 * slot + a];
        }
    }
    (e.re, forces)
}
