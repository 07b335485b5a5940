//! Cloth material parameters. Units: cm / g / s, so stiffnesses are in
//! g/s² (force per unit strain per cm of edge, roughly dyn per unit strain).

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct PanelMaterial {
    pub stretch_warp: f64,
    pub stretch_weft: f64,
    pub stretch_shear: f64,
    /// Curvature-difference stiffnesses in the warp/weft frame.
    pub bend_warp: f64,
    pub bend_weft: f64,
    pub bend_shear: f64,
    /// Area density, g/cm².
    pub density: f64,
    /// Cloth-cloth contact activation distance, cm.
    pub thickness: f64,
}

impl Default for PanelMaterial {
    fn default() -> Self {
        PanelMaterial {
            stretch_warp: 1.0e4,
            stretch_weft: 1.0e4,
            stretch_shear: 2.0e3,
            bend_warp: 50.0,
            bend_weft: 50.0,
            bend_shear: 10.0,
            density: 0.02,
            thickness: 0.3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct SeamMaterial {
    /// Spring stiffness on the fold angle across sewn edges.
    pub bend_stiffness: f64,
    /// Damping on the fold-angle rate.
    pub bend_damping: f64,
}

impl Default for SeamMaterial {
    fn default() -> Self {
        SeamMaterial {
            bend_stiffness: 200.0,
            bend_damping: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default, PartialEq)]
#[serde(default)]
pub struct MaterialParams {
    pub default: PanelMaterial,
    /// Per-panel overrides by panel id.
    pub per_panel: BTreeMap<u32, PanelMaterial>,
    pub seam: SeamMaterial,
}

impl MaterialParams {
    pub fn for_panel(&self, panel: u32) -> &PanelMaterial {
        self.per_panel.get(&panel).unwrap_or(&self.default)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |m: &PanelMaterial, which: &str| -> Result<()> {
            let fields = [
                ("stretch_warp", m.stretch_warp),
                ("stretch_weft", m.stretch_weft),
                ("stretch_shear", m.stretch_shear),
                ("bend_warp", m.bend_warp),
                ("bend_weft", m.bend_weft),
                ("bend_shear", m.bend_shear),
                ("density", m.density),
            ];
            for (name, v) in fields {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::invalid(
                        "material",
                        format!("{which}: {name} must be finite and ≥ 0, got {v}"),
                    ));
                }
            }
            if !(m.density > 0.0) {
                return Err(Error::invalid(
                    "material",
                    format!("{which}: density must be > 0"),
                ));
            }
            if !(m.thickness >= 0.0) {
                return Err(Error::invalid(
                    "material",
                    format!("{which}: thickness must be ≥ 0"),
                ));
            }
            Ok(())
        };
        check(&self.default, "default")?;
        for (panel, m) in &self.per_panel {
            check(m, &format!("panel {panel}"))?;
        }
        if !(self.seam.bend_stiffness >= 0.0 && self.seam.bend_damping >= 0.0) {
            return Err(Error::invalid(
                "material",
                "seam stiffness/damping must be ≥ 0",
            ));
        }
        Ok(())
    }
}
