//! Anisotropic in-plane stretch: separate warp, weft, and shear penalties on
//! the deformation gradient mapping the 2D pattern into 3D.

use crate::sim::material::PanelMaterial;
use crate::{Mat2, Vec3};

/// Energy and per-vertex forces for one triangle.
///
/// `inv_edge` is the inverse of the 2D rest edge matrix, so the deformation
/// gradient is `F = [x1-x0, x2-x0] · inv_edge`, and `F·e_x`, `F·e_y` are the
/// 3D images of the warp and weft directions. The energy is
/// `A·(k_warp/2 (|F·e_x|-1)² + k_weft/2 (|F·e_y|-1)² + k_shear/2 (F·e_x · F·e_y)²)`.
pub fn stretch_force(
    x: [Vec3; 3],
    inv_edge: &Mat2,
    area: f64,
    mat: &PanelMaterial,
) -> (f64, [Vec3; 3]) {
    let d1 = x[1] - x[0];
    let d2 = x[2] - x[0];
    let wu = d1 * inv_edge[(0, 0)] + d2 * inv_edge[(1, 0)];
    let wv = d1 * inv_edge[(0, 1)] + d2 * inv_edge[(1, 1)];

    let lu = wu.norm();
    let lv = wv.norm();
    let shear = wu.dot(&wv);

    let energy = area
        * (0.5 * mat.stretch_warp * (lu - 1.0) * (lu - 1.0)
            + 0.5 * mat.stretch_weft * (lv - 1.0) * (lv - 1.0)
            + 0.5 * mat.stretch_shear * shear * shear);

    // ∂E/∂wu and ∂E/∂wv; unit directions vanish harmlessly for collapsed axes
    let mut gu = area * mat.stretch_shear * shear * wv;
    if lu > 1e-12 {
        gu += area * mat.stretch_warp * (lu - 1.0) / lu * wu;
    }
    let mut gv = area * mat.stretch_shear * shear * wu;
    if lv > 1e-12 {
        gv += area * mat.stretch_weft * (lv - 1.0) / lv * wv;
    }

    let f1 = -(gu * inv_edge[(0, 0)] + gv * inv_edge[(0, 1)]);
    let f2 = -(gu * inv_edge[(1, 0)] + gv * inv_edge[(1, 1)]);
    let f0 = -(f1 + f2);
    (energy, [f0, f1, f2])
}
