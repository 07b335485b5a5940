//! Final smoothing pass: seam and border vertices stay where the optimizer
//! put them, interior vertices re-solve a Laplace problem whose cotangent
//! weights come from the original pattern — so interior triangles keep
//! shapes similar to their authored ones no matter what the optimizer did
//! on the way.

use crate::mesh::TriMesh3;
use crate::{Error, Result, Vec2};
use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use std::collections::BTreeMap;

/// Cotangent of the angle at `apex` in a 2D triangle.
fn cot_at(apex: Vec2, a: Vec2, b: Vec2) -> f64 {
    let u = a - apex;
    let v = b - apex;
    let cross = u.perp(&v).abs().max(1e-300);
    u.dot(&v) / cross
}

/// Replace interior (un-pinned) vertices of `layout` by the harmonic
/// interpolation of the pinned ones, with cotangent weights measured on
/// `original`. Connected components without any pinned vertex are left
/// untouched (an all-pinned panel trivially so).
pub fn dirichlet_tidy(
    mesh: &TriMesh3,
    original: &[Vec2],
    pinned: &[bool],
    layout: &mut [Vec2],
) -> Result<()> {
    let n = layout.len();
    assert_eq!(original.len(), n);
    assert_eq!(pinned.len(), n);

    // skip components that have no pinned vertex: their Laplace problem has
    // no boundary data (free-floating panel), so leave them as they are
    let (component, ncomp) = mesh.vertex_components();
    let mut comp_has_pin = vec![false; ncomp as usize];
    for v in 0..n {
        if pinned[v] {
            comp_has_pin[component[v] as usize] = true;
        }
    }
    let solvable = |v: usize| !pinned[v] && comp_has_pin[component[v] as usize];

    let mut index = vec![usize::MAX; n];
    let mut interior = Vec::new();
    for v in 0..n {
        if solvable(v) {
            index[v] = interior.len();
            interior.push(v);
        }
    }
    if interior.is_empty() {
        return Ok(());
    }
    if !comp_has_pin.iter().all(|&p| p) {
        log::debug!("dirichlet tidy: some panels have no pinned vertices; left untouched");
    }

    // cotan weights on the original pattern, accumulated per edge
    let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for tri in &mesh.triangles {
        let [i, j, k] = tri.map(|v| v as usize);
        let (pi, pj, pk) = (original[i], original[j], original[k]);
        for (a, b, w) in [
            (i, j, 0.5 * cot_at(pk, pi, pj)),
            (j, k, 0.5 * cot_at(pi, pj, pk)),
            (k, i, 0.5 * cot_at(pj, pk, pi)),
        ] {
            *weights.entry((a.min(b), a.max(b))).or_insert(0.0) += w;
        }
    }

    let m = interior.len();
    let mut h: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut rhs = vec![Vec2::zeros(); m];
    for (&(a, b), &w) in &weights {
        for (p, q) in [(a, b), (b, a)] {
            let ip = index[p];
            if ip == usize::MAX {
                continue;
            }
            *h.entry((ip, ip)).or_insert(0.0) += w;
            if index[q] != usize::MAX {
                *h.entry((ip, index[q])).or_insert(0.0) -= w;
            } else {
                rhs[ip] += w * layout[q];
            }
        }
    }
    let triplets: Vec<Triplet<usize, usize, f64>> = h
        .iter()
        .map(|(&(i, j), &v)| Triplet::new(i, j, v))
        .collect();
    let mat = SparseColMat::try_new_from_triplets(m, m, &triplets)
        .map_err(|e| Error::solver("dirichlet tidy", format!("assembly failed: {e:?}")))?;
    let llt = mat
        .sp_cholesky(faer::Side::Lower)
        .map_err(|e| Error::solver("dirichlet tidy", format!("factorization failed: {e:?}")))?;
    for comp in 0..2 {
        let mut col = faer::Col::<f64>::from_fn(m, |i| rhs[i][comp]);
        llt.solve_in_place(col.as_mat_mut());
        for (i, value) in col.iter().enumerate() {
            layout[interior[i]][comp] = *value;
        }
    }
    Ok(())
}

/// Dirichlet energy of a layout under the original pattern's cotan weights;
/// the quantity `dirichlet_tidy` minimizes over interior vertices.
pub fn dirichlet_energy(mesh: &TriMesh3, original: &[Vec2], layout: &[Vec2]) -> f64 {
    let mut e = 0.0;
    for tri in &mesh.triangles {
        let [i, j, k] = tri.map(|v| v as usize);
        let (pi, pj, pk) = (original[i], original[j], original[k]);
        for (a, b, w) in [
            (i, j, 0.5 * cot_at(pk, pi, pj)),
            (j, k, 0.5 * cot_at(pi, pj, pk)),
            (k, i, 0.5 * cot_at(pj, pk, pi)),
        ] {
            e += 0.5 * w * (layout[a] - layout[b]).norm_squared();
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::patch_xy;
    use crate::{Vec2, Vec3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> (TriMesh3, Vec<Vec2>, Vec<bool>) {
        let (mesh, layout) = patch_xy(Vec3::zeros(), 4, 4, 1.0, 1.0);
        let border: Vec<bool> = {
            let mut b = vec![false; layout.len()];
            for (u, v) in mesh.boundary_edges() {
                b[u as usize] = true;
                b[v as usize] = true;
            }
            b
        };
        (mesh, layout, border)
    }

    #[test]
    fn rest_boundary_restores_rest_interior() {
        // a flat layout is discretely harmonic in its own cotan weights, so
        // pinning the border at rest must reproduce the rest interior even
        // from a scrambled start
        let (mesh, rest, pinned) = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut layout: Vec<Vec2> = rest
            .iter()
            .zip(&pinned)
            .map(|(p, &pin)| {
                if pin {
                    *p
                } else {
                    p + Vec2::new(rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4))
                }
            })
            .collect();
        dirichlet_tidy(&mesh, &rest, &pinned, &mut layout).unwrap();
        for (a, b) in layout.iter().zip(&rest) {
            assert!((a - b).norm() < 1e-10, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn scaled_pins_scale_the_interior() {
        let (mesh, rest, pinned) = grid();
        let mut layout: Vec<Vec2> = rest
            .iter()
            .zip(&pinned)
            .map(|(p, &pin)| if pin { 1.3 * p } else { *p })
            .collect();
        dirichlet_tidy(&mesh, &rest, &pinned, &mut layout).unwrap();
        for (a, b) in layout.iter().zip(&rest) {
            assert!((a - 1.3 * b).norm() < 1e-10);
        }
    }

    #[test]
    fn tidy_strictly_decreases_dirichlet_energy() {
        let (mesh, rest, pinned) = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let noisy: Vec<Vec2> = rest
            .iter()
            .zip(&pinned)
            .map(|(p, &pin)| {
                if pin {
                    *p
                } else {
                    p + Vec2::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3))
                }
            })
            .collect();
        let before = dirichlet_energy(&mesh, &rest, &noisy);
        let mut layout = noisy.clone();
        dirichlet_tidy(&mesh, &rest, &pinned, &mut layout).unwrap();
        let after = dirichlet_energy(&mesh, &rest, &layout);
        assert!(after < before, "{after} vs {before}");
    }

    #[test]
    fn all_pinned_panel_is_untouched() {
        let (mesh, rest, _) = grid();
        let pinned = vec![true; rest.len()];
        let moved: Vec<Vec2> = rest.iter().map(|p| p + Vec2::new(0.3, -0.2)).collect();
        let mut layout = moved.clone();
        dirichlet_tidy(&mesh, &rest, &pinned, &mut layout).unwrap();
        assert_eq!(layout, moved);
    }

    #[test]
    fn unpinned_component_is_left_alone() {
        // two disconnected patches; only the first has pins
        let (mesh_a, lay_a) = patch_xy(Vec3::zeros(), 2, 2, 1.0, 1.0);
        let (mesh_b, lay_b) = patch_xy(Vec3::new(0.0, 0.0, 2.0), 2, 2, 1.0, 1.0);
        let nv = mesh_a.positions.len();
        let mut positions = mesh_a.positions.clone();
        positions.extend_from_slice(&mesh_b.positions);
        let mut triangles = mesh_a.triangles.clone();
        triangles.extend(mesh_b.triangles.iter().map(|t| t.map(|v| v + nv as u32)));
        let mesh = TriMesh3::new(positions, triangles);
        let mut rest = lay_a.clone();
        rest.extend(lay_b.iter().map(|p| p + Vec2::new(5.0, 0.0)));
        let mut pinned = vec![false; rest.len()];
        for (u, v) in mesh_a.boundary_edges() {
            pinned[u as usize] = true;
            pinned[v as usize] = true;
        }
        // pins stay at rest, everything unpinned starts displaced
        let moved: Vec<Vec2> = rest
            .iter()
            .zip(&pinned)
            .map(|(p, &pin)| if pin { *p } else { p + Vec2::new(0.1, 0.1) })
            .collect();
        let mut layout = moved.clone();
        dirichlet_tidy(&mesh, &rest, &pinned, &mut layout).unwrap();
        // patch B floats: untouched
        for v in nv..rest.len() {
            assert_eq!(layout[v], moved[v]);
        }
        // patch A interior got re-solved back to the harmonic (= rest) state
        for v in (0..nv).filter(|&v| !pinned[v]) {
            assert!((layout[v] - rest[v]).norm() < 1e-10);
        }
    }
}
