//! Tangent-frame targets for pattern re-optimization.
//!
//! A triangle's tangent frame is the 3×2 matrix of its warp/weft tangents.
//! Splitting it into rotation and stretch (F = R·S) lets the optimizer pick
//! what to keep from the refitted garment: just the orientation (`Loose` —
//! panels relax to their unstretched shape on the new body) or the original
//! worn strain re-applied on the new orientation (`PreserveFit` — the garment
//! fits the new body the way it fit the old one).

use super::binding::{edge_matrix_3d, rebind, TangentBinding};
use crate::{Error, Mat2, Mat3x2, Result, Vec3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// Keep only the target orientation; panels take their relaxed shape.
    Loose,
    /// Re-apply the source garment's worn stretch on the target orientation.
    #[default]
    PreserveFit,
}

/// Polar decomposition of a 3×2 tangent frame: F = R·S with R's columns
/// orthonormal and S symmetric positive semidefinite. Errors when the frame
/// has collapsed to a line or point (rank < 2).
pub fn polar_3x2(f: &Mat3x2) -> Result<(Mat3x2, Mat2)> {
    let svd = f.svd(true, true);
    let u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    let s = svd.singular_values;
    if !(s[1] > 1e-12 * s[0].max(f64::MIN_POSITIVE)) {
        return Err(Error::invalid(
            "tangent frame",
            format!(
                "rank-deficient frame (singular values {:.3e}, {:.3e})",
                s[0], s[1]
            ),
        ));
    }
    let r = u * v_t;
    let sym = v_t.transpose() * Mat2::from_diagonal(&s) * v_t;
    Ok((r, sym))
}

/// Target frame for one triangle, plus its coordinates in the target
/// triangle's own edge basis (what the layout optimizer consumes: the 2D
/// frame of a candidate layout is E₂(x)·bind, driven toward identity).
#[derive(Debug, Clone)]
pub struct TargetFrame {
    pub frame: Mat3x2,
    pub bind: Mat2,
}

/// Build per-triangle optimization targets from the source and target
/// configurations of the same garment triangulation.
pub fn build_target_frames(
    binding: &TangentBinding,
    source: &[Vec3],
    target: &[Vec3],
    triangles: &[[u32; 3]],
    mode: FitMode,
) -> Result<Vec<TargetFrame>> {
    triangles
        .par_iter()
        .enumerate()
        .map(|(t, &tri)| {
            let e_target = edge_matrix_3d(target, tri);
            let f_target = e_target * binding.m[t];
            let (r_target, _) = polar_3x2(&f_target).map_err(|e| {
                Error::invalid("tangent frame", format!("triangle {t} (target): {e}"))
            })?;
            let frame = match mode {
                FitMode::Loose => r_target,
                FitMode::PreserveFit => {
                    let f_source = edge_matrix_3d(source, tri) * binding.m[t];
                    let (_, s_ref) = polar_3x2(&f_source).map_err(|e| {
                        Error::invalid("tangent frame", format!("triangle {t} (source): {e}"))
                    })?;
                    r_target * s_ref
                }
            };
            let bind = rebind(&e_target, &frame).ok_or_else(|| {
                Error::invalid(
                    "tangent frame",
                    format!("triangle {t} is degenerate on the target"),
                )
            })?;
            Ok(TargetFrame { frame, bind })
        })
        .collect()
}
