//! A garment as authored: 3D mesh, 2D sewing-pattern layout, seams, material,
//! draping layer, and per-panel semantic tags (used to pick which panels are
//! dropped when building simulation proxies).
//!
//! The 2D layout shares the 3D triangle list one-to-one. Panels are the
//! connected components of that shared topology: sewing is never expressed by
//! shared vertices, always by explicit seam pairs.

use super::seam::SeamSpec;
use super::TriMesh3;
use crate::sim::material::MaterialParams;
use crate::{Error, Result, Vec2};
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct PatternLayout2D {
    /// One 2D position per 3D vertex.
    pub positions: Vec<Vec2>,
    /// Panel id per triangle (triangle list lives on the paired `TriMesh3`).
    pub panel_of_triangle: Vec<u32>,
}

impl PatternLayout2D {
    pub fn signed_area(&self, tri: [u32; 3]) -> f64 {
        let a = self.positions[tri[0] as usize];
        let b = self.positions[tri[1] as usize];
        let c = self.positions[tri[2] as usize];
        0.5 * ((b - a).perp(&(c - a)))
    }

    pub fn panel_ids(&self) -> Vec<u32> {
        let mut ids = self.panel_of_triangle.clone();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Axis-aligned bounds of each panel's vertices.
    pub fn panel_bounds(&self, mesh: &TriMesh3) -> BTreeMap<u32, (Vec2, Vec2)> {
        let mut bounds: BTreeMap<u32, (Vec2, Vec2)> = BTreeMap::new();
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let panel = self.panel_of_triangle[t];
            let entry = bounds
                .entry(panel)
                .or_insert((Vec2::repeat(f64::INFINITY), Vec2::repeat(f64::NEG_INFINITY)));
            for &v in tri {
                let p = self.positions[v as usize];
                entry.0 = entry.0.inf(&p);
                entry.1 = entry.1.sup(&p);
            }
        }
        bounds
    }
}

#[derive(Debug, Clone)]
pub struct GarmentSheet {
    pub mesh: TriMesh3,
    pub layout: PatternLayout2D,
    pub seams: SeamSpec,
    pub material: MaterialParams,
    /// Draping order; lower layers are simulated (and frozen) first.
    pub layer: i32,
    /// Panel id → semantic tag ("pocket", "button", ...).
    pub semantics: BTreeMap<u32, String>,
}

impl GarmentSheet {
    /// Panel id of each vertex, derived from triangle panel ids.
    pub fn panel_of_vertex(&self) -> Vec<u32> {
        let mut out = vec![u32::MAX; self.mesh.positions.len()];
        for (t, tri) in self.mesh.triangles.iter().enumerate() {
            for &v in tri {
                out[v as usize] = self.layout.panel_of_triangle[t];
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        self.mesh.validate()?;
        self.material.validate()?;
        self.seams.validate(&self.mesh)?;

        if self.layout.positions.len() != self.mesh.positions.len() {
            return Err(Error::invalid(
                "layout",
                format!(
                    "2D position count {} does not match vertex count {}",
                    self.layout.positions.len(),
                    self.mesh.positions.len()
                ),
            ));
        }
        if self.layout.panel_of_triangle.len() != self.mesh.triangles.len() {
            return Err(Error::invalid(
                "layout",
                format!(
                    "panel id count {} does not match triangle count {}",
                    self.layout.panel_of_triangle.len(),
                    self.mesh.triangles.len()
                ),
            ));
        }

        // layout triangles must be positively oriented (and non-degenerate)
        for (t, tri) in self.mesh.triangles.iter().enumerate() {
            let area = self.layout.signed_area(*tri);
            if !(area > super::MIN_TRI_AREA) {
                return Err(Error::invalid(
                    "layout",
                    format!("layout triangle {t} has non-positive area {area:.3e} cm²"),
                ));
            }
        }

        // every triangle of a connected component must carry the same panel id,
        // and a panel id must not span two components
        let (comp_of_vertex, _) = self.mesh.vertex_components();
        let mut comp_of_panel: BTreeMap<u32, u32> = BTreeMap::new();
        let mut panel_of_comp: BTreeMap<u32, u32> = BTreeMap::new();
        for (t, tri) in self.mesh.triangles.iter().enumerate() {
            let panel = self.layout.panel_of_triangle[t];
            let comp = comp_of_vertex[tri[0] as usize];
            if let Some(&c) = comp_of_panel.get(&panel) {
                if c != comp {
                    return Err(Error::invalid(
                        "layout",
                        format!("panel {panel} spans disconnected mesh pieces (triangle {t})"),
                    ));
                }
            } else {
                comp_of_panel.insert(panel, comp);
            }
            if let Some(&p) = panel_of_comp.get(&comp) {
                if p != panel {
                    return Err(Error::invalid(
                        "layout",
                        format!(
                            "mesh component contains two panel ids ({p} and {panel}, triangle {t})"
                        ),
                    ));
                }
            } else {
                panel_of_comp.insert(comp, panel);
            }
        }

        // panels must occupy disjoint 2D regions (bounding-box check, small
        // tolerance so touching outlines pass)
        let bounds = self.layout.panel_bounds(&self.mesh);
        let tol = 1e-9;
        let entries: Vec<_> = bounds.iter().collect();
        for (i, (pa, (lo_a, hi_a))) in entries.iter().enumerate() {
            for (pb, (lo_b, hi_b)) in entries.iter().skip(i + 1) {
                let overlap_x = hi_a.x.min(hi_b.x) - lo_a.x.max(lo_b.x);
                let overlap_y = hi_a.y.min(hi_b.y) - lo_a.y.max(lo_b.y);
                if overlap_x > tol && overlap_y > tol {
                    return Err(Error::invalid(
                        "layout",
                        format!("panels {pa} and {pb} overlap in the 2D layout"),
                    ));
                }
            }
        }

        // semantic tags must refer to existing panels
        let panels = self.layout.panel_ids();
        for panel in self.semantics.keys() {
            if !panels.contains(panel) {
                return Err(Error::invalid(
                    "semantics",
                    format!("tag references unknown panel {panel}"),
                ));
            }
        }

        Ok(())
    }
}

/// Two 1×1 quads, disconnected, sewn along facing edges, laid out side by
/// side in 2D. Shared test fixture.
#[cfg(test)]
pub(crate) fn two_panel_sheet() -> GarmentSheet {
    use crate::Vec3;
    let positions = vec![
        // panel 0
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(1.0, 1.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        // panel 1 (coincident seam edge at x=1)
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(2.0, 0.0, 0.0),
        Vec3::new(2.0, 1.0, 0.0),
        Vec3::new(1.0, 1.0, 0.0),
    ];
    let triangles = vec![[0, 1, 2], [0, 2, 3], [4, 5, 6], [4, 6, 7]];
    let mesh = TriMesh3::new(positions, triangles);
    let layout = PatternLayout2D {
        positions: vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.5, 0.0),
            Vec2::new(2.5, 0.0),
            Vec2::new(2.5, 1.0),
            Vec2::new(1.5, 1.0),
        ],
        panel_of_triangle: vec![0, 0, 1, 1],
    };
    let seams = crate::mesh::build_seam_groups(&[(1, 4), (2, 7)], &mesh).unwrap();
    GarmentSheet {
        mesh,
        layout,
        seams,
        material: MaterialParams::default(),
        layer: 0,
        semantics: BTreeMap::new(),
    }
}
