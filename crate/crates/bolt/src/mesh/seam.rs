//! Sewing correspondences between panel border vertices.
//!
//! Pairs are merged transitively into seam groups (a vertex sewn to two
//! others puts all three in one group). Each group stores per-member offsets
//! relative to the group centroid at build time; the simulator keeps members
//! at `group center + offset`, so offsets sum to zero by construction.

use super::TriMesh3;
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Default)]
pub struct SeamSpec {
    pub pairs: Vec<(u32, u32)>,
    pub groups: Vec<SeamGroup>,
}

#[derive(Debug, Clone)]
pub struct SeamGroup {
    /// Sorted vertex indices.
    pub members: Vec<u32>,
    /// Member position minus group centroid, in build order of `members`.
    pub offsets: Vec<Vec3>,
}

impl SeamSpec {
    pub fn empty() -> Self {
        SeamSpec::default()
    }

    /// Group index for each vertex, `u32::MAX` where unsewn.
    pub fn vertex_group_map(&self, vertex_count: usize) -> Vec<u32> {
        let mut map = vec![u32::MAX; vertex_count];
        for (g, group) in self.groups.iter().enumerate() {
            for &m in &group.members {
                map[m as usize] = g as u32;
            }
        }
        map
    }

    /// All sewn vertices, sorted.
    pub fn sewn_vertices(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self
            .groups
            .iter()
            .flat_map(|g| g.members.iter().copied())
            .collect();
        v.sort_unstable();
        v
    }

    pub fn validate(&self, mesh: &TriMesh3) -> Result<()> {
        let n = mesh.positions.len() as u32;
        let mut seen = vec![false; n as usize];
        for group in &self.groups {
            if group.members.len() < 2 {
                return Err(Error::invalid(
                    "seams",
                    format!("seam group {:?} has fewer than two members", group.members),
                ));
            }
            if group.members.len() != group.offsets.len() {
                return Err(Error::invalid("seams", "offset count mismatch"));
            }
            let mut sum = Vec3::zeros();
            let mut scale = 0.0f64;
            for (&m, off) in group.members.iter().zip(&group.offsets) {
                if m >= n {
                    return Err(Error::invalid(
                        "seams",
                        format!("seam vertex {m} out of range ({n} vertices)"),
                    ));
                }
                if seen[m as usize] {
                    return Err(Error::invalid(
                        "seams",
                        format!("vertex {m} appears in more than one seam group"),
                    ));
                }
                seen[m as usize] = true;
                sum += off;
                scale = scale.max(off.norm());
            }
            if sum.norm() > 1e-9 * scale.max(1.0) {
                return Err(Error::invalid(
                    "seams",
                    format!(
                        "group offsets do not sum to zero (|Σ| = {:.3e})",
                        sum.norm()
                    ),
                ));
            }
        }
        for &(a, b) in &self.pairs {
            if a >= n || b >= n {
                return Err(Error::invalid(
                    "seams",
                    format!("seam pair ({a}, {b}) out of range ({n} vertices)"),
                ));
            }
        }
        Ok(())
    }
}

/// Pairs of sewn border edges: each entry is one seam edge seen from both
/// sides, `[[a, b], [a', b']]`, where every endpoint of one side is sewn to
/// the corresponding endpoint of the other.
pub fn seam_edge_pairs(mesh: &TriMesh3, seams: &SeamSpec) -> Vec<[[u32; 2]; 2]> {
    use std::collections::BTreeSet;
    let norm = |a: u32, b: u32| (a.min(b), a.max(b));
    let mut border: Vec<(u32, u32)> = mesh.boundary_edges();
    border.sort_unstable();
    let border_set: BTreeSet<(u32, u32)> = border.iter().map(|&(a, b)| norm(a, b)).collect();
    let group_of = seams.vertex_group_map(mesh.positions.len());

    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &(a, b) in &border {
        let (ga, gb) = (group_of[a as usize], group_of[b as usize]);
        if ga == u32::MAX || gb == u32::MAX {
            continue;
        }
        for &a2 in &seams.groups[ga as usize].members {
            for &b2 in &seams.groups[gb as usize].members {
                if a2 == b2 || norm(a2, b2) == norm(a, b) {
                    continue;
                }
                if border_set.contains(&norm(a2, b2)) {
                    let key = {
                        let (e1, e2) = (norm(a, b), norm(a2, b2));
                        (e1.min(e2), e1.max(e2))
                    };
                    if seen.insert(key) {
                        out.push([[a, b], [a2, b2]]);
                    }
                }
            }
        }
    }
    out
}

/// Merge sewn-vertex pairs into seam groups with centroid-relative offsets
/// taken from current mesh positions. Output is deterministic regardless of
/// pair order: groups sorted by smallest member, members sorted ascending.
pub fn build_seam_groups(pairs: &[(u32, u32)], mesh: &TriMesh3) -> Result<SeamSpec> {
    let n = mesh.positions.len() as u32;
    for &(a, b) in pairs {
        if a >= n || b >= n {
            return Err(Error::invalid(
                "seams",
                format!("seam pair ({a}, {b}) out of range ({n} vertices)"),
            ));
        }
        if a == b {
            return Err(Error::invalid(
                "seams",
                format!("seam pair sews vertex {a} to itself"),
            ));
        }
    }

    let mut parent: Vec<u32> = (0..n).collect();
    fn find(parent: &mut [u32], mut i: u32) -> u32 {
        while parent[i as usize] != i {
            parent[i as usize] = parent[parent[i as usize] as usize];
            i = parent[i as usize];
        }
        i
    }
    for &(a, b) in pairs {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            // attach larger root under smaller for deterministic roots
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            parent[hi as usize] = lo;
        }
    }

    let mut members_by_root: std::collections::BTreeMap<u32, Vec<u32>> = Default::default();
    let mut sewn: Vec<u32> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    sewn.sort_unstable();
    sewn.dedup();
    for v in sewn {
        let r = find(&mut parent, v);
        members_by_root.entry(r).or_default().push(v);
    }

    let mut groups = Vec::with_capacity(members_by_root.len());
    for (_, members) in members_by_root {
        let centroid = members
            .iter()
            .map(|&m| mesh.positions[m as usize])
            .sum::<Vec3>()
            / members.len() as f64;
        let offsets = members
            .iter()
            .map(|&m| mesh.positions[m as usize] - centroid)
            .collect();
        groups.push(SeamGroup { members, offsets });
    }

    Ok(SeamSpec {
        pairs: pairs.to_vec(),
        groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_mesh(count: usize) -> TriMesh3 {
        // positions along x; triangles irrelevant for grouping, use a fan
        let positions: Vec<Vec3> = (0..count)
            .map(|i| Vec3::new(i as f64, (i as f64).sin(), 0.0))
            .collect();
        let mut triangles = Vec::new();
        for i in 0..count.saturating_sub(2) {
            triangles.push([i as u32, i as u32 + 1, i as u32 + 2]);
        }
        TriMesh3 {
            positions,
            triangles,
            normals: None,
        }
    }

    #[test]
    fn transitive_merge_and_zero_sum() {
        let m = line_mesh(10);
        let spec = build_seam_groups(&[(0, 5), (5, 9)], &m).unwrap();
        assert_eq!(spec.groups.len(), 1);
        assert_eq!(spec.groups[0].members, vec![0, 5, 9]);
        let sum: Vec3 = spec.groups[0].offsets.iter().sum();
        assert!(sum.norm() < 1e-12);
        spec.validate(&m).unwrap();
    }

    #[test]
    fn pair_order_does_not_matter() {
        let m = line_mesh(12);
        let a = build_seam_groups(&[(0, 5), (5, 9), (2, 3), (10, 11)], &m).unwrap();
        let b = build_seam_groups(&[(10, 11), (5, 9), (3, 2), (0, 5)], &m).unwrap();
        let ga: Vec<_> = a.groups.iter().map(|g| g.members.clone()).collect();
        let gb: Vec<_> = b.groups.iter().map(|g| g.members.clone()).collect();
        assert_eq!(ga, gb);
    }

    #[test]
    fn rejects_bad_pairs() {
        let m = line_mesh(4);
        assert!(build_seam_groups(&[(0, 7)], &m).is_err());
        assert!(build_seam_groups(&[(2, 2)], &m).is_err());
    }

    #[test]
    fn seam_edges_pair_up_across_panels() {
        let sheet = crate::mesh::garment::two_panel_sheet();
        let pairs = seam_edge_pairs(&sheet.mesh, &sheet.seams);
        // one sewn edge per side: 1–2 on panel 0 paired with 4–7 on panel 1
        assert_eq!(pairs.len(), 1);
        let norm = |e: [u32; 2]| (e[0].min(e[1]), e[0].max(e[1]));
        let got = [norm(pairs[0][0]), norm(pairs[0][1])];
        assert!(got.contains(&(1, 2)) && got.contains(&(4, 7)), "{got:?}");
    }

    #[test]
    fn groups_partition_the_sewn_set() {
        let m = line_mesh(20);
        let pairs = [(0, 3), (3, 6), (1, 2), (8, 9), (9, 10), (10, 8)];
        let spec = build_seam_groups(&pairs, &m).unwrap();
        let mut all: Vec<u32> = spec.sewn_vertices();
        let mut expect: Vec<u32> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        expect.sort_unstable();
        expect.dedup();
        all.dedup();
        assert_eq!(all, expect);
        // no vertex in two groups
        let map = spec.vertex_group_map(m.positions.len());
        for g in &spec.groups {
            for &v in &g.members {
                assert_eq!(spec.groups[map[v as usize] as usize].members, g.members);
            }
        }
    }
}
