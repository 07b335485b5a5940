//! Indexed triangle meshes and the queries the rest of the pipeline leans on.
//!
//! Positions are centimeters. Triangles are CCW; `validate` rejects
//! out-of-range indices, degenerate triangles (area ≤ 1e-12 cm²) and
//! non-unit stored normals.

pub mod bvh;
pub mod garment;
pub mod obj;
pub mod primitive;
pub mod query;
pub mod seam;

pub use bvh::TriangleBvh;
pub use garment::{GarmentSheet, PatternLayout2D};
pub use query::{closest_point_on_mesh, SurfaceSide};
pub use seam::{build_seam_groups, seam_edge_pairs, SeamGroup, SeamSpec};

use crate::{Error, Result, Vec3};

/// Triangles with area at or below this (cm²) are rejected as degenerate.
pub const MIN_TRI_AREA: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct TriMesh3 {
    pub positions: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    /// Optional per-vertex unit normals (same length as `positions`).
    pub normals: Option<Vec<Vec3>>,
}

impl TriMesh3 {
    pub fn new(positions: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Self {
        TriMesh3 {
            positions,
            triangles,
            normals: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.positions.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                if v as usize >= n {
                    return Err(Error::invalid(
                        "mesh",
                        format!("triangle {t} references vertex {v} but mesh has {n} vertices"),
                    ));
                }
            }
            let area = self.tri_area(t);
            if !(area > MIN_TRI_AREA) {
                return Err(Error::invalid(
                    "mesh",
                    format!("triangle {t} is degenerate (area {area:.3e} cm²)"),
                ));
            }
        }
        for p in &self.positions {
            if !p.iter().all(|c| c.is_finite()) {
                return Err(Error::invalid("mesh", "non-finite vertex position"));
            }
        }
        if let Some(normals) = &self.normals {
            if normals.len() != n {
                return Err(Error::invalid(
                    "mesh",
                    format!(
                        "normal count {} does not match vertex count {n}",
                        normals.len()
                    ),
                ));
            }
            for (i, nm) in normals.iter().enumerate() {
                if (nm.norm() - 1.0).abs() > 1e-6 {
                    return Err(Error::invalid(
                        "mesh",
                        format!("normal {i} is not unit length (|n| = {})", nm.norm()),
                    ));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn tri_pos(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [
            self.positions[a as usize],
            self.positions[b as usize],
            self.positions[c as usize],
        ]
    }

    /// Cross-product normal scaled by twice the triangle area.
    #[inline]
    pub fn tri_raw_normal(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.tri_pos(t);
        (b - a).cross(&(c - a))
    }

    #[inline]
    pub fn tri_area(&self, t: usize) -> f64 {
        0.5 * self.tri_raw_normal(t).norm()
    }

    #[inline]
    pub fn tri_normal(&self, t: usize) -> Vec3 {
        self.tri_raw_normal(t).normalize()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.tri_area(t)).sum()
    }

    /// Area-weighted vertex normals, normalized. Isolated vertices get +y.
    pub fn area_weighted_vertex_normals(&self) -> Vec<Vec3> {
        let mut acc = vec![Vec3::zeros(); self.positions.len()];
        for t in 0..self.triangles.len() {
            let raw = self.tri_raw_normal(t);
            for &v in &self.triangles[t] {
                acc[v as usize] += raw;
            }
        }
        for n in &mut acc {
            let len = n.norm();
            if len > 1e-20 {
                *n /= len;
            } else {
                *n = Vec3::new(0.0, 1.0, 0.0);
            }
        }
        acc
    }

    pub fn aabb(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for p in &self.positions {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (lo, hi)
    }

    pub fn bbox_diagonal(&self) -> f64 {
        let (lo, hi) = self.aabb();
        (hi - lo).norm()
    }

    pub fn centroid(&self) -> Vec3 {
        let mut c = Vec3::zeros();
        for p in &self.positions {
            c += p;
        }
        c / self.positions.len().max(1) as f64
    }

    /// For each triangle, the neighbor triangle across each of its three edges
    /// (edge k runs from vertex k to vertex k+1). `None` on boundaries.
    pub fn tri_neighbors(&self) -> Vec<[Option<u32>; 3]> {
        use std::collections::HashMap;
        let mut by_edge: HashMap<(u32, u32), (u32, u8)> = HashMap::new();
        let mut out = vec![[None, None, None]; self.triangles.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                let key = (a.min(b), a.max(b));
                match by_edge.entry(key) {
                    std::collections::hash_map::Entry::Occupied(e) => {
                        let (other_t, other_k) = *e.get();
                        out[t][k] = Some(other_t);
                        out[other_t as usize][other_k as usize] = Some(t as u32);
                    }
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert((t as u32, k as u8));
                    }
                }
            }
        }
        out
    }

    /// Undirected edges used by exactly one triangle, i.e. the mesh boundary.
    pub fn boundary_edges(&self) -> Vec<(u32, u32)> {
        use std::collections::HashMap;
        let mut count: HashMap<(u32, u32), u32> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                count
                    .entry((a.min(b), a.max(b)))
                    .and_modify(|c| *c += 1)
                    .or_insert(1);
            }
        }
        let mut edges: Vec<(u32, u32)> = count
            .into_iter()
            .filter_map(|(e, c)| (c == 1).then_some(e))
            .collect();
        edges.sort_unstable();
        edges
    }

    /// Per-vertex sorted neighbor lists over mesh edges.
    pub fn vertex_neighbors(&self) -> Vec<Vec<u32>> {
        let mut nbrs = vec![Vec::new(); self.positions.len()];
        for tri in &self.triangles {
            for k in 0..3 {
                let a = tri[k] as usize;
                let b = tri[(k + 1) % 3];
                nbrs[a].push(b);
                nbrs[b as usize].push(tri[k]);
            }
        }
        for list in &mut nbrs {
            list.sort_unstable();
            list.dedup();
        }
        nbrs
    }

    /// Triangles incident to each vertex.
    pub fn vertex_triangles(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.positions.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                out[v as usize].push(t as u32);
            }
        }
        out
    }

    /// Connected components over shared vertices; returns per-vertex component id
    /// and the component count. Unreferenced vertices get their own components.
    pub fn vertex_components(&self) -> (Vec<u32>, u32) {
        let mut parent: Vec<u32> = (0..self.positions.len() as u32).collect();
        fn find(parent: &mut [u32], i: u32) -> u32 {
            let mut i = i;
            while parent[i as usize] != i {
                parent[i as usize] = parent[parent[i as usize] as usize];
                i = parent[i as usize];
            }
            i
        }
        for tri in &self.triangles {
            let ra = find(&mut parent, tri[0]);
            for &v in &tri[1..] {
                let rv = find(&mut parent, v);
                if ra != rv {
                    parent[rv as usize] = ra;
                }
            }
        }
        let mut ids = vec![u32::MAX; self.positions.len()];
        let mut next = 0u32;
        for v in 0..self.positions.len() as u32 {
            let r = find(&mut parent, v);
            if ids[r as usize] == u32::MAX {
                ids[r as usize] = next;
                next += 1;
            }
            ids[v as usize] = ids[r as usize];
        }
        (ids, next)
    }
}
