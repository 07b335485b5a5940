//! Axis-aligned bounding-box tree over mesh triangles.
//!
//! Built once (median split, ≤4 triangles per leaf), refit in place as the
//! mesh deforms. Refitting keeps topology, so box quality decays under large
//! deformation; `degraded` reports when total box area has grown past a
//! factor of the as-built area and a rebuild is worthwhile.

use super::primitive::{
    aabb_distance, closest_point_triangle, point_aabb_distance, ray_triangle,
    triangle_triangle_closest, RayHit,
};
use super::TriMesh3;
use crate::Vec3;

#[derive(Debug, Clone)]
struct Node {
    lo: Vec3,
    hi: Vec3,
    /// Leaf when `count > 0`: triangles `prims[start..start+count]`.
    /// Internal otherwise: children at `left` and `left + 1` is not assumed;
    /// both child ids stored explicitly.
    left: u32,
    right: u32,
    start: u32,
    count: u32,
}

#[derive(Debug, Clone)]
pub struct TriangleBvh {
    nodes: Vec<Node>,
    prims: Vec<u32>,
    built_area: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ClosestHit {
    pub distance: f64,
    pub triangle: u32,
    pub point: Vec3,
    pub bary: [f64; 3],
}

#[derive(Debug, Clone, Copy)]
pub struct MeshRayHit {
    pub triangle: u32,
    pub t: f64,
    pub bary: [f64; 3],
}

const LEAF_SIZE: usize = 4;

impl TriangleBvh {
    pub fn build(mesh: &TriMesh3) -> Self {
        assert!(
            !mesh.triangles.is_empty(),
            "cannot build a BVH over an empty mesh"
        );
        let mut prims: Vec<u32> = (0..mesh.triangles.len() as u32).collect();
        let centroids: Vec<Vec3> = (0..mesh.triangles.len())
            .map(|t| {
                let [a, b, c] = mesh.tri_pos(t);
                (a + b + c) / 3.0
            })
            .collect();
        let mut nodes = Vec::with_capacity(2 * mesh.triangles.len());
        Self::build_node(
            mesh,
            &centroids,
            &mut nodes,
            &mut prims,
            0,
            mesh.triangles.len(),
        );
        let mut bvh = TriangleBvh {
            nodes,
            prims,
            built_area: 0.0,
        };
        bvh.built_area = bvh.total_area();
        bvh
    }

    fn build_node(
        mesh: &TriMesh3,
        centroids: &[Vec3],
        nodes: &mut Vec<Node>,
        prims: &mut [u32],
        start: usize,
        count: usize,
    ) -> u32 {
        let id = nodes.len() as u32;
        nodes.push(Node {
            lo: Vec3::zeros(),
            hi: Vec3::zeros(),
            left: 0,
            right: 0,
            start: start as u32,
            count: 0,
        });

        let (lo, hi) = triangle_bounds(mesh, &prims[start..start + count]);
        if count <= LEAF_SIZE {
            let n = &mut nodes[id as usize];
            n.lo = lo;
            n.hi = hi;
            n.count = count as u32;
            return id;
        }

        // median split along the widest centroid axis; ties broken by
        // triangle index so builds are deterministic
        let mut clo = Vec3::repeat(f64::INFINITY);
        let mut chi = Vec3::repeat(f64::NEG_INFINITY);
        for &p in &prims[start..start + count] {
            clo = clo.inf(&centroids[p as usize]);
            chi = chi.sup(&centroids[p as usize]);
        }
        let ext = chi - clo;
        let axis = if ext.x >= ext.y && ext.x >= ext.z {
            0
        } else if ext.y >= ext.z {
            1
        } else {
            2
        };
        let slice = &mut prims[start..start + count];
        slice.sort_unstable_by(|&a, &b| {
            centroids[a as usize][axis]
                .partial_cmp(&centroids[b as usize][axis])
                .unwrap()
                .then(a.cmp(&b))
        });
        let half = count / 2;

        let left = Self::build_node(mesh, centroids, nodes, prims, start, half);
        let right = Self::build_node(mesh, centroids, nodes, prims, start + half, count - half);
        let n = &mut nodes[id as usize];
        n.lo = lo;
        n.hi = hi;
        n.left = left;
        n.right = right;
        id
    }

    /// Recompute all boxes from current vertex positions without changing
    /// topology. Children always have larger indices than their parent, so a
    /// reverse sweep suffices.
    pub fn refit(&mut self, mesh: &TriMesh3) {
        for i in (0..self.nodes.len()).rev() {
            if self.nodes[i].count > 0 {
                let span = self.nodes[i].start as usize
                    ..(self.nodes[i].start + self.nodes[i].count) as usize;
                let (lo, hi) = triangle_bounds(mesh, &self.prims[span]);
                self.nodes[i].lo = lo;
                self.nodes[i].hi = hi;
            } else {
                let l = &self.nodes[self.nodes[i].left as usize];
                let r = &self.nodes[self.nodes[i].right as usize];
                let lo = l.lo.inf(&r.lo);
                let hi = l.hi.sup(&r.hi);
                self.nodes[i].lo = lo;
                self.nodes[i].hi = hi;
            }
        }
    }

    pub fn total_area(&self) -> f64 {
        self.nodes
            .iter()
            .map(|n| {
                let e = n.hi - n.lo;
                2.0 * (e.x * e.y + e.y * e.z + e.z * e.x)
            })
            .sum()
    }

    /// True when cumulative box area has grown by more than `factor` since the
    /// tree was built.
    pub fn degraded(&self, factor: f64) -> bool {
        self.total_area() > factor * self.built_area
    }

    pub fn root_bounds(&self) -> (Vec3, Vec3) {
        (self.nodes[0].lo, self.nodes[0].hi)
    }

    pub fn closest_point(&self, mesh: &TriMesh3, p: Vec3) -> ClosestHit {
        let mut best = ClosestHit {
            distance: f64::INFINITY,
            triangle: u32::MAX,
            point: p,
            bary: [0.0; 3],
        };
        self.closest_rec(mesh, p, 0, &mut best);
        best
    }

    fn closest_rec(&self, mesh: &TriMesh3, p: Vec3, node: u32, best: &mut ClosestHit) {
        let n = &self.nodes[node as usize];
        if point_aabb_distance(p, n.lo, n.hi) >= best.distance {
            return;
        }
        if n.count > 0 {
            for &t in &self.prims[n.start as usize..(n.start + n.count) as usize] {
                let [a, b, c] = mesh.tri_pos(t as usize);
                let (q, bary) = closest_point_triangle(p, a, b, c);
                let d = (p - q).norm();
                if d < best.distance {
                    *best = ClosestHit {
                        distance: d,
                        triangle: t,
                        point: q,
                        bary,
                    };
                }
            }
            return;
        }
        let l = n.left;
        let r = n.right;
        let dl = point_aabb_distance(p, self.nodes[l as usize].lo, self.nodes[l as usize].hi);
        let dr = point_aabb_distance(p, self.nodes[r as usize].lo, self.nodes[r as usize].hi);
        if dl <= dr {
            self.closest_rec(mesh, p, l, best);
            self.closest_rec(mesh, p, r, best);
        } else {
            self.closest_rec(mesh, p, r, best);
            self.closest_rec(mesh, p, l, best);
        }
    }

    /// Nearest ray hit within `t_max`, both-sided.
    pub fn raycast(
        &self,
        mesh: &TriMesh3,
        orig: Vec3,
        dir: Vec3,
        t_max: f64,
    ) -> Option<MeshRayHit> {
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best: Option<MeshRayHit> = None;
        self.raycast_rec(mesh, orig, dir, inv, t_max, 0, &mut best);
        best
    }

    fn raycast_rec(
        &self,
        mesh: &TriMesh3,
        orig: Vec3,
        dir: Vec3,
        inv: Vec3,
        t_max: f64,
        node: u32,
        best: &mut Option<MeshRayHit>,
    ) {
        let n = &self.nodes[node as usize];
        let limit = best.map_or(t_max, |h| h.t);
        let Some(t_enter) = ray_aabb(orig, inv, n.lo, n.hi, limit) else {
            return;
        };
        let _ = t_enter;
        if n.count > 0 {
            for &t in &self.prims[n.start as usize..(n.start + n.count) as usize] {
                let [a, b, c] = mesh.tri_pos(t as usize);
                if let Some(RayHit { t: th, bary }) =
                    ray_triangle(orig, dir, a, b, c, best.map_or(t_max, |h| h.t))
                {
                    if best.map_or(true, |h| th < h.t) {
                        *best = Some(MeshRayHit {
                            triangle: t,
                            t: th,
                            bary,
                        });
                    }
                }
            }
            return;
        }
        let l = n.left;
        let r = n.right;
        let el = ray_aabb_entry(
            orig,
            inv,
            self.nodes[l as usize].lo,
            self.nodes[l as usize].hi,
        );
        let er = ray_aabb_entry(
            orig,
            inv,
            self.nodes[r as usize].lo,
            self.nodes[r as usize].hi,
        );
        if el <= er {
            self.raycast_rec(mesh, orig, dir, inv, t_max, l, best);
            self.raycast_rec(mesh, orig, dir, inv, t_max, r, best);
        } else {
            self.raycast_rec(mesh, orig, dir, inv, t_max, r, best);
            self.raycast_rec(mesh, orig, dir, inv, t_max, l, best);
        }
    }

    /// Triangle pairs from two distinct meshes whose distance is ≤ `radius`.
    pub fn proximity_pairs(
        &self,
        mesh_a: &TriMesh3,
        other: &TriangleBvh,
        mesh_b: &TriMesh3,
        radius: f64,
    ) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        self.pairs_rec(mesh_a, other, mesh_b, radius, 0, 0, &mut out);
        out.sort_unstable();
        out
    }

    fn pairs_rec(
        &self,
        mesh_a: &TriMesh3,
        other: &TriangleBvh,
        mesh_b: &TriMesh3,
        radius: f64,
        na: u32,
        nb: u32,
        out: &mut Vec<(u32, u32)>,
    ) {
        let a = &self.nodes[na as usize];
        let b = &other.nodes[nb as usize];
        if aabb_distance(a.lo, a.hi, b.lo, b.hi) > radius {
            return;
        }
        match (a.count > 0, b.count > 0) {
            (true, true) => {
                for &ta in &self.prims[a.start as usize..(a.start + a.count) as usize] {
                    for &tb in &other.prims[b.start as usize..(b.start + b.count) as usize] {
                        let (d, _, _) = triangle_triangle_closest(
                            mesh_a.tri_pos(ta as usize),
                            mesh_b.tri_pos(tb as usize),
                        );
                        if d <= radius {
                            out.push((ta, tb));
                        }
                    }
                }
            }
            (false, true) => {
                self.pairs_rec(mesh_a, other, mesh_b, radius, a.left, nb, out);
                self.pairs_rec(mesh_a, other, mesh_b, radius, a.right, nb, out);
            }
            (true, false) => {
                self.pairs_rec(mesh_a, other, mesh_b, radius, na, b.left, out);
                self.pairs_rec(mesh_a, other, mesh_b, radius, na, b.right, out);
            }
            (false, false) => {
                self.pairs_rec(mesh_a, other, mesh_b, radius, a.left, b.left, out);
                self.pairs_rec(mesh_a, other, mesh_b, radius, a.left, b.right, out);
                self.pairs_rec(mesh_a, other, mesh_b, radius, a.right, b.left, out);
                self.pairs_rec(mesh_a, other, mesh_b, radius, a.right, b.right, out);
            }
        }
    }

    /// Unordered triangle pairs (i < j, i ≠ j) of one mesh within `radius` of
    /// each other. Each pair is reported once.
    pub fn self_proximity_pairs(&self, mesh: &TriMesh3, radius: f64) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        self.self_pairs_rec(mesh, radius, 0, 0, &mut out);
        out.sort_unstable();
        out
    }

    fn self_pairs_rec(
        &self,
        mesh: &TriMesh3,
        radius: f64,
        na: u32,
        nb: u32,
        out: &mut Vec<(u32, u32)>,
    ) {
        let a = &self.nodes[na as usize];
        let b = &self.nodes[nb as usize];
        if aabb_distance(a.lo, a.hi, b.lo, b.hi) > radius {
            return;
        }
        if na == nb {
            if a.count > 0 {
                let span = &self.prims[a.start as usize..(a.start + a.count) as usize];
                for (i, &ta) in span.iter().enumerate() {
                    for &tb in &span[i + 1..] {
                        self.emit_pair(mesh, radius, ta, tb, out);
                    }
                }
            } else {
                self.self_pairs_rec(mesh, radius, a.left, a.left, out);
                self.self_pairs_rec(mesh, radius, a.left, a.right, out);
                self.self_pairs_rec(mesh, radius, a.right, a.right, out);
            }
            return;
        }
        match (a.count > 0, b.count > 0) {
            (true, true) => {
                for &ta in &self.prims[a.start as usize..(a.start + a.count) as usize] {
                    for &tb in &self.prims[b.start as usize..(b.start + b.count) as usize] {
                        self.emit_pair(mesh, radius, ta, tb, out);
                    }
                }
            }
            (false, true) => {
                self.self_pairs_rec(mesh, radius, a.left, nb, out);
                self.self_pairs_rec(mesh, radius, a.right, nb, out);
            }
            (true, false) => {
                self.self_pairs_rec(mesh, radius, na, b.left, out);
                self.self_pairs_rec(mesh, radius, na, b.right, out);
            }
            (false, false) => {
                self.self_pairs_rec(mesh, radius, a.left, b.left, out);
                self.self_pairs_rec(mesh, radius, a.left, b.right, out);
                self.self_pairs_rec(mesh, radius, a.right, b.left, out);
                self.self_pairs_rec(mesh, radius, a.right, b.right, out);
            }
        }
    }

    fn emit_pair(&self, mesh: &TriMesh3, radius: f64, ta: u32, tb: u32, out: &mut Vec<(u32, u32)>) {
        let (d, _, _) =
            triangle_triangle_closest(mesh.tri_pos(ta as usize), mesh.tri_pos(tb as usize));
        if d <= radius {
            out.push((ta.min(tb), ta.max(tb)));
        }
    }

    /// Triangles whose box overlaps the query box (callers do exact tests).
    pub fn box_candidates(&self, lo: Vec3, hi: Vec3) -> Vec<u32> {
        let mut out = Vec::new();
        let mut stack = vec![0u32];
        while let Some(id) = stack.pop() {
            let n = &self.nodes[id as usize];
            if aabb_distance(n.lo, n.hi, lo, hi) > 0.0 {
                continue;
            }
            if n.count > 0 {
                out.extend_from_slice(&self.prims[n.start as usize..(n.start + n.count) as usize]);
            } else {
                stack.push(n.left);
                stack.push(n.right);
            }
        }
        out.sort_unstable();
        out
    }
}

fn triangle_bounds(mesh: &TriMesh3, prims: &[u32]) -> (Vec3, Vec3) {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for &t in prims {
        for p in mesh.tri_pos(t as usize) {
            lo = lo.inf(&p);
            hi = hi.sup(&p);
        }
    }
    (lo, hi)
}

fn ray_aabb(orig: Vec3, inv: Vec3, lo: Vec3, hi: Vec3, t_max: f64) -> Option<f64> {
    let mut t0: f64 = 0.0;
    let mut t1 = t_max;
    for k in 0..3 {
        let a = (lo[k] - orig[k]) * inv[k];
        let b = (hi[k] - orig[k]) * inv[k];
        let (near, far) = if a <= b { (a, b) } else { (b, a) };
        if near.is_nan() || far.is_nan() {
            continue; // ray parallel and inside the slab (0 * inf): skip axis
        }
        t0 = t0.max(near);
        t1 = t1.min(far);
        if t0 > t1 {
            return None;
        }
    }
    Some(t0)
}

fn ray_aabb_entry(orig: Vec3, inv: Vec3, lo: Vec3, hi: Vec3) -> f64 {
    ray_aabb(orig, inv, lo, hi, f64::INFINITY).unwrap_or(f64::INFINITY)
}
