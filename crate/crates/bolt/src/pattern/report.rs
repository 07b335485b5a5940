//! Inspection outputs for a pattern run: seam-length bookkeeping for the
//! JSON report, and before/after panel outlines as an SVG.

use crate::mesh::GarmentSheet;
pub use crate::mesh::seam::seam_edge_pairs;
use crate::Vec2;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Summed sewn-edge lengths per panel pair, in the authored layout and the
/// optimized one. The two sides should agree after optimization; the before
/// numbers show how far apart the panels started.
#[derive(Debug, Clone, Serialize)]
pub struct SeamLengthDelta {
    pub panels: [u32; 2],
    pub edges: usize,
    pub before: [f64; 2],
    pub after: [f64; 2],
}

pub fn seam_length_deltas(sheet: &GarmentSheet, after: &[Vec2]) -> Vec<SeamLengthDelta> {
    let panel_of = sheet.panel_of_vertex();
    let before = &sheet.layout.positions;
    let mut map: BTreeMap<(u32, u32), SeamLengthDelta> = BTreeMap::new();
    for [ea, eb] in seam_edge_pairs(&sheet.mesh, &sheet.seams) {
        let (pa, pb) = (panel_of[ea[0] as usize], panel_of[eb[0] as usize]);
        let (s0, s1, key) = if pa <= pb {
            (ea, eb, (pa, pb))
        } else {
            (eb, ea, (pb, pa))
        };
        let len = |x: &[Vec2], e: [u32; 2]| (x[e[0] as usize] - x[e[1] as usize]).norm();
        let entry = map.entry(key).or_insert(SeamLengthDelta {
            panels: [key.0, key.1],
            edges: 0,
            before: [0.0; 2],
            after: [0.0; 2],
        });
        entry.edges += 1;
        entry.before[0] += len(before, s0);
        entry.before[1] += len(before, s1);
        entry.after[0] += len(after, s0);
        entry.after[1] += len(after, s1);
    }
    map.into_values().collect()
}

/// Before/after outlines of every panel in one SVG: the authored layout
/// dashed, the optimized one solid. Y points up, as in the layout itself.
pub fn pattern_svg(sheet: &GarmentSheet, after: &[Vec2]) -> String {
    let before = &sheet.layout.positions;
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in before.iter().chain(after) {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    if !lo.x.is_finite() {
        lo = Vec2::zeros();
        hi = Vec2::new(1.0, 1.0);
    }
    let span = (hi - lo).amax().max(1e-6);
    let margin = 0.05 * span;
    let (minx, miny) = (lo.x - margin, lo.y - margin);
    let (w, h) = (hi.x - lo.x + 2.0 * margin, hi.y - lo.y + 2.0 * margin);
    let stroke = 0.004 * span;

    let panel_of = sheet.panel_of_vertex();
    let mut edges_by_panel: BTreeMap<u32, Vec<(u32, u32)>> = BTreeMap::new();
    let mut border = sheet.mesh.boundary_edges();
    border.sort_unstable();
    for (a, b) in border {
        edges_by_panel
            .entry(panel_of[a as usize])
            .or_default()
            .push((a, b));
    }

    let path_for = |positions: &[Vec2], edges: &[(u32, u32)]| {
        let mut d = String::new();
        for &(a, b) in edges {
            let (pa, pb) = (positions[a as usize], positions[b as usize]);
            let _ = write!(d, "M{:.4} {:.4}L{:.4} {:.4}", pa.x, pa.y, pb.x, pb.y);
        }
        d
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{minx:.4} {:.4} {w:.4} {h:.4}">"#,
        -(miny + h)
    );
    // flip y so the layout's up stays up
    let _ = writeln!(
        svg,
        r#"<g transform="scale(1,-1)" fill="none" stroke-linecap="round">"#
    );
    for (panel, edges) in &edges_by_panel {
        let _ = writeln!(
            svg,
            r##"<path id="panel-{panel}-before" stroke="#999" stroke-width="{:.4}" stroke-dasharray="{:.4} {:.4}" d="{}"/>"##,
            stroke,
            3.0 * stroke,
            2.0 * stroke,
            path_for(before, edges)
        );
        let _ = writeln!(
            svg,
            r##"<path id="panel-{panel}-after" stroke="#000" stroke-width="{:.4}" d="{}"/>"##,
            stroke,
            path_for(after, edges)
        );
    }
    let _ = writeln!(svg, "</g>\n</svg>");
    svg
}
