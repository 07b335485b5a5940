//! Edge-length constraints for the pattern optimizer.
//!
//! Every panel-border vertex (and, by default, every sewn vertex on an
//! internal seam line) gets one constraint over its two polyline neighbor
//! vectors. Vertices sewn together share a scale group so that, during
//! optimization, both sides of a seam are fitted with one common scale —
//! that is what keeps sewn edge lengths in agreement even when the panels
//! want different sizes.

use crate::mesh::{PatternLayout2D, SeamSpec, TriMesh3};
use crate::{Error, Result, Vec2};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone)]
pub struct EdgeConstraint {
    pub vertex: u32,
    /// Polyline neighbors; a lone neighbor is listed twice and then simply
    /// counts double in the scale fit.
    pub neighbors: [u32; 2],
    /// Neighbor vectors in the rest layout.
    pub rest: [Vec2; 2],
    /// Half the summed rest edge lengths.
    pub l: f64,
    /// Constraints sharing a group id share one scale factor.
    pub group: u32,
}

impl EdgeConstraint {
    pub fn current(&self, x: &[Vec2]) -> [Vec2; 2] {
        let p = x[self.vertex as usize];
        [
            x[self.neighbors[0] as usize] - p,
            x[self.neighbors[1] as usize] - p,
        ]
    }
}

/// Pick a vertex's two polyline neighbors from a candidate set, doubling a
/// lone neighbor. More than two (a non-manifold pinch) keeps the two lowest
/// indices so runs stay deterministic.
fn pick_neighbors(vertex: u32, candidates: &BTreeSet<u32>) -> Option<[u32; 2]> {
    let mut it = candidates.iter();
    match (it.next(), it.next()) {
        (Some(&a), Some(&b)) => {
            if candidates.len() > 2 {
                log::debug!(
                    "vertex {vertex} has {} polyline neighbors; keeping {a} and {b}",
                    candidates.len()
                );
            }
            Some([a, b])
        }
        (Some(&a), None) => Some([a, a]),
        _ => None,
    }
}

pub fn build_edge_constraints(
    mesh: &TriMesh3,
    layout: &PatternLayout2D,
    seams: &SeamSpec,
    include_internal_seams: bool,
) -> Result<Vec<EdgeConstraint>> {
    let mut border_adj: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
    for (a, b) in mesh.boundary_edges() {
        border_adj.entry(a).or_default().insert(b);
        border_adj.entry(b).or_default().insert(a);
    }
    let group_of = seams.vertex_group_map(mesh.positions.len());
    let seam_group_count = seams.groups.len() as u32;
    let mut next_free_group = seam_group_count;

    let sewn: BTreeSet<u32> = seams.sewn_vertices().into_iter().collect();
    let neighbor_sets = if include_internal_seams {
        Some(mesh.vertex_neighbors())
    } else {
        None
    };

    let mut constraints = Vec::new();
    let mut constrain = |vertex: u32, neighbors: [u32; 2]| -> Result<()> {
        let p = layout.positions[vertex as usize];
        let rest = [
            layout.positions[neighbors[0] as usize] - p,
            layout.positions[neighbors[1] as usize] - p,
        ];
        let l = 0.5 * (rest[0].norm() + rest[1].norm());
        if l <= 0.0 {
            return Err(Error::invalid(
                "edge neighborhood",
                format!("vertex {vertex} has zero-length rest edges"),
            ));
        }
        let group = if group_of[vertex as usize] != u32::MAX {
            group_of[vertex as usize]
        } else {
            next_free_group += 1;
            next_free_group - 1
        };
        constraints.push(EdgeConstraint {
            vertex,
            neighbors,
            rest,
            l,
            group,
        });
        Ok(())
    };

    for (&v, nbrs) in &border_adj {
        if let Some(n) = pick_neighbors(v, nbrs) {
            constrain(v, n)?;
        }
    }
    if let Some(adj) = &neighbor_sets {
        for &v in &sewn {
            if border_adj.contains_key(&v) {
                continue; // already constrained along the border
            }
            // internal seam line: neighbors are the adjacent sewn vertices
            let cand: BTreeSet<u32> = adj[v as usize]
                .iter()
                .copied()
                .filter(|n| sewn.contains(n))
                .collect();
            match pick_neighbors(v, &cand) {
                Some(n) => constrain(v, n)?,
                None => log::debug!("sewn interior vertex {v} has no sewn neighbors; skipped"),
            }
        }
    }
    Ok(constraints)
}

/// Constraint indices grouped by scale-group id, each group sorted; the
/// outer list is ordered by group id so parallel z-updates stay reproducible.
pub fn group_members(constraints: &[EdgeConstraint]) -> Vec<Vec<usize>> {
    let mut map: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, c) in constraints.iter().enumerate() {
        map.entry(c.group).or_default().push(i);
    }
    map.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_seam_groups;
    use crate::mesh::garment::two_panel_sheet;
    use crate::shapes::{patch_xy, tube_garment};
    use crate::Vec3;

    #[test]
    fn quad_panels_constrain_every_border_vertex() {
        let sheet = two_panel_sheet();
        let cs = build_edge_constraints(&sheet.mesh, &sheet.layout, &sheet.seams, true).unwrap();
        // all 8 vertices are border vertices with exactly two neighbors
        assert_eq!(cs.len(), 8);
        for c in &cs {
            assert_ne!(c.neighbors[0], c.neighbors[1]);
            assert!((c.l - 1.0).abs() < 1e-12, "unit quads: L = ½(1+1)");
        }
        // sewn vertices share their seam group; others are singletons
        let by_vertex: BTreeMap<u32, u32> = cs.iter().map(|c| (c.vertex, c.group)).collect();
        assert_eq!(by_vertex[&1], by_vertex[&4]);
        assert_eq!(by_vertex[&2], by_vertex[&7]);
        assert_ne!(by_vertex[&1], by_vertex[&2]);
        let groups: BTreeSet<u32> = cs.iter().map(|c| c.group).collect();
        assert_eq!(groups.len(), 6, "2 tied pairs + 4 singletons");
    }

    #[test]
    fn tube_border_vertices_each_get_a_constraint() {
        let g = tube_garment(Vec3::zeros(), 4.0, 4.0, 6.0, 12, 3, 0);
        let cs = build_edge_constraints(&g.mesh, &g.layout, &g.seams, true).unwrap();
        for c in &cs {
            assert!(c.l > 0.0);
        }
        // the development is an open rectangle: all four sides are border
        let border: BTreeSet<u32> = g
            .mesh
            .boundary_edges()
            .into_iter()
            .flat_map(|(a, b)| [a, b])
            .collect();
        assert_eq!(cs.len(), border.len());
    }

    #[test]
    fn internal_seam_vertices_constrain_along_the_seam() {
        // two 3×3-quad patches stacked in z, sewn along their middle rows:
        // the middle-row center vertex is interior and sewn.
        let (mesh_a, lay_a) = patch_xy(Vec3::zeros(), 3, 2, 1.0, 1.0);
        let (mesh_b, lay_b) = patch_xy(Vec3::new(0.0, 0.0, 1.0), 3, 2, 1.0, 1.0);
        let nv = mesh_a.positions.len() as u32;
        let mut positions = mesh_a.positions.clone();
        positions.extend_from_slice(&mesh_b.positions);
        let mut triangles = mesh_a.triangles.clone();
        triangles.extend(mesh_b.triangles.iter().map(|t| t.map(|v| v + nv)));
        let mesh = TriMesh3::new(positions, triangles);
        let mut layout_positions = lay_a.clone();
        layout_positions.extend(lay_b.iter().map(|p| p + Vec2::new(5.0, 0.0)));
        let layout = PatternLayout2D {
            positions: layout_positions,
            panel_of_triangle: vec![0; mesh_a.triangles.len()]
                .into_iter()
                .chain(vec![1; mesh_b.triangles.len()])
                .collect(),
        };
        // middle row of a 4-wide grid: vertices 4..8 (row j=1)
        let pairs: Vec<(u32, u32)> = (4..8).map(|i| (i, i + nv)).collect();
        let seams = build_seam_groups(&pairs, &mesh).unwrap();

        let with = build_edge_constraints(&mesh, &layout, &seams, true).unwrap();
        let without = build_edge_constraints(&mesh, &layout, &seams, false).unwrap();
        // interior sewn vertices: row ends (4, 7) sit on the border; 5 and 6
        // are interior on each patch → 4 extra constraints when included.
        assert_eq!(with.len(), without.len() + 4);
        let c5 = with
            .iter()
            .find(|c| c.vertex == 5)
            .expect("vertex 5 constrained");
        assert_eq!(c5.neighbors, [4, 6], "neighbors along the sewn row");
        assert!(without.iter().all(|c| c.vertex != 5));
        // sewn counterparts share the group even across the border/interior mix
        let by_vertex: BTreeMap<u32, u32> = with.iter().map(|c| (c.vertex, c.group)).collect();
        assert_eq!(by_vertex[&5], by_vertex[&(5 + nv)]);
    }

    #[test]
    fn groups_collect_in_deterministic_order() {
        let sheet = two_panel_sheet();
        let cs = build_edge_constraints(&sheet.mesh, &sheet.layout, &sheet.seams, true).unwrap();
        let groups = group_members(&cs);
        let flat: Vec<usize> = groups.iter().flatten().copied().collect();
        let mut sorted = flat.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..cs.len()).collect::<Vec<_>>());
        for g in &groups {
            assert!(g.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
