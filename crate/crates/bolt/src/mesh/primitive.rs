//! Scalar triangle/segment geometry. Everything here is allocation-free and
//! exact about its contracts; BVH traversal and collision code build on it.

use crate::Vec3;

/// Closest point on triangle `abc` to `p`, as barycentric coordinates.
/// Ericson's region-based method.
pub fn closest_point_triangle_bary(p: Vec3, a: Vec3, b: Vec3, c: Vec3) -> [f64; 3] {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return [1.0, 0.0, 0.0];
    }

    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return [0.0, 1.0, 0.0];
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return [1.0 - v, v, 0.0];
    }

    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return [0.0, 0.0, 1.0];
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return [1.0 - w, 0.0, w];
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return [0.0, 1.0 - w, w];
    }

    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    [1.0 - v - w, v, w]
}

pub fn bary_point(bary: [f64; 3], a: Vec3, b: Vec3, c: Vec3) -> Vec3 {
    a * bary[0] + b * bary[1] + c * bary[2]
}

pub fn closest_point_triangle(p: Vec3, a: Vec3, b: Vec3, c: Vec3) -> (Vec3, [f64; 3]) {
    let bary = closest_point_triangle_bary(p, a, b, c);
    (bary_point(bary, a, b, c), bary)
}

/// Closest parameters (s, t) ∈ [0,1]² between segments p1→q1 and p2→q2.
pub fn closest_param_segment_segment(p1: Vec3, q1: Vec3, p2: Vec3, q2: Vec3) -> (f64, f64) {
    const EPS: f64 = 1e-30;
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);

    if a <= EPS && e <= EPS {
        return (0.0, 0.0);
    }
    if a <= EPS {
        return (0.0, (f / e).clamp(0.0, 1.0));
    }
    let c = d1.dot(&r);
    if e <= EPS {
        return ((-c / a).clamp(0.0, 1.0), 0.0);
    }

    let b = d1.dot(&d2);
    let denom = a * e - b * b;
    let mut s = if denom != 0.0 {
        ((b * f - c * e) / denom).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    (s, t)
}

#[derive(Debug, Clone, Copy)]
pub struct RayHit {
    pub t: f64,
    /// Barycentric coordinates of the hit (weights of vertices a, b, c).
    pub bary: [f64; 3],
}

/// Möller–Trumbore, both-sided, hits with `0 ≤ t ≤ t_max`.
pub fn ray_triangle(
    orig: Vec3,
    dir: Vec3,
    a: Vec3,
    b: Vec3,
    c: Vec3,
    t_max: f64,
) -> Option<RayHit> {
    const EPS: f64 = 1e-13;
    let e1 = b - a;
    let e2 = c - a;
    let pvec = dir.cross(&e2);
    let det = e1.dot(&pvec);
    if det.abs() < EPS * e1.norm() * e2.norm() * dir.norm().max(1e-300) {
        return None;
    }
    let inv = 1.0 / det;
    let tvec = orig - a;
    let u = tvec.dot(&pvec) * inv;
    if !(-1e-12..=1.0 + 1e-12).contains(&u) {
        return None;
    }
    let qvec = tvec.cross(&e1);
    let v = dir.dot(&qvec) * inv;
    if v < -1e-12 || u + v > 1.0 + 1e-12 {
        return None;
    }
    let t = e2.dot(&qvec) * inv;
    if t < 0.0 || t > t_max {
        return None;
    }
    Some(RayHit {
        t,
        bary: [1.0 - u - v, u, v],
    })
}

/// Closest points between two triangles. Returns (distance, bary on A, bary on B).
/// Distance is 0 when the triangles intersect.
pub fn triangle_triangle_closest(a: [Vec3; 3], b: [Vec3; 3]) -> (f64, [f64; 3], [f64; 3]) {
    let mut best = f64::INFINITY;
    let mut best_a = [1.0, 0.0, 0.0];
    let mut best_b = [1.0, 0.0, 0.0];

    // vertices of A against B and vice versa
    for i in 0..3 {
        let bary_i = {
            let mut w = [0.0; 3];
            w[i] = 1.0;
            w
        };
        let (q, wb) = closest_point_triangle(a[i], b[0], b[1], b[2]);
        let d = (a[i] - q).norm_squared();
        if d < best {
            best = d;
            best_a = bary_i;
            best_b = wb;
        }
        let (q, wa) = closest_point_triangle(b[i], a[0], a[1], a[2]);
        let d = (b[i] - q).norm_squared();
        if d < best {
            best = d;
            best_a = wa;
            best_b = bary_i;
        }
    }

    // edge pairs
    for i in 0..3 {
        let (p1, q1) = (a[i], a[(i + 1) % 3]);
        for j in 0..3 {
            let (p2, q2) = (b[j], b[(j + 1) % 3]);
            let (s, t) = closest_param_segment_segment(p1, q1, p2, q2);
            let pa = p1 + (q1 - p1) * s;
            let pb = p2 + (q2 - p2) * t;
            let d = (pa - pb).norm_squared();
            if d < best {
                best = d;
                best_a = edge_bary(i, s);
                best_b = edge_bary(j, t);
            }
        }
    }

    // piercing: an edge of one passes through the other
    if best > 0.0 {
        for i in 0..3 {
            let (p, q) = (a[i], a[(i + 1) % 3]);
            let d = q - p;
            if let Some(hit) = ray_triangle(p, d, b[0], b[1], b[2], 1.0) {
                return (0.0, edge_bary(i, hit.t), hit.bary);
            }
            let (p, q) = (b[i], b[(i + 1) % 3]);
            let d = q - p;
            if let Some(hit) = ray_triangle(p, d, a[0], a[1], a[2], 1.0) {
                return (0.0, hit.bary, edge_bary(i, hit.t));
            }
        }
    }

    (best.sqrt(), best_a, best_b)
}

fn edge_bary(edge: usize, s: f64) -> [f64; 3] {
    let mut w = [0.0; 3];
    w[edge] = 1.0 - s;
    w[(edge + 1) % 3] = s;
    w
}

/// Triangle vs axis-aligned box (center/half-extent) separating-axis test.
pub fn tri_box_overlap(center: Vec3, half: Vec3, tri: [Vec3; 3]) -> bool {
    let v0 = tri[0] - center;
    let v1 = tri[1] - center;
    let v2 = tri[2] - center;
    let e0 = v1 - v0;
    let e1 = v2 - v1;
    let e2 = v0 - v2;

    // box axes
    for k in 0..3 {
        let lo = v0[k].min(v1[k]).min(v2[k]);
        let hi = v0[k].max(v1[k]).max(v2[k]);
        if lo > half[k] || hi < -half[k] {
            return false;
        }
    }

    // 9 cross-product axes
    let edges = [e0, e1, e2];
    for e in &edges {
        for k in 0..3 {
            let mut axis = Vec3::zeros();
            // axis = unit(k) × e
            axis[(k + 1) % 3] = -e[(k + 2) % 3];
            axis[(k + 2) % 3] = e[(k + 1) % 3];
            let p0 = v0.dot(&axis);
            let p1 = v1.dot(&axis);
            let p2 = v2.dot(&axis);
            let r = half[0] * axis[0].abs() + half[1] * axis[1].abs() + half[2] * axis[2].abs();
            let lo = p0.min(p1).min(p2);
            let hi = p0.max(p1).max(p2);
            if lo > r || hi < -r {
                return false;
            }
        }
    }

    // triangle plane
    let n = e0.cross(&(v2 - v0));
    let d = n.dot(&v0);
    let r = half[0] * n[0].abs() + half[1] * n[1].abs() + half[2] * n[2].abs();
    d.abs() <= r
}

/// Distance between two AABBs (0 when overlapping).
pub fn aabb_distance(lo_a: Vec3, hi_a: Vec3, lo_b: Vec3, hi_b: Vec3) -> f64 {
    let mut d2 = 0.0;
    for k in 0..3 {
        let gap = (lo_b[k] - hi_a[k]).max(lo_a[k] - hi_b[k]).max(0.0);
        d2 += gap * gap;
    }
    d2.sqrt()
}

pub fn point_aabb_distance(p: Vec3, lo: Vec3, hi: Vec3) -> f64 {
    let mut d2 = 0.0;
    for k in 0..3 {
        let gap = (lo[k] - p[k]).max(p[k] - hi[k]).max(0.0);
        d2 += gap * gap;
    }
    d2.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: [Vec3; 3] = [
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(2.0, 0.0, 0.0),
        Vec3::new(0.0, 2.0, 0.0),
    ];

    #[test]
    fn closest_point_regions() {
        // interior
        let (q, w) = closest_point_triangle(Vec3::new(0.5, 0.5, 3.0), A[0], A[1], A[2]);
        assert!((q - Vec3::new(0.5, 0.5, 0.0)).norm() < 1e-14);
        assert!((w[0] + w[1] + w[2] - 1.0).abs() < 1e-14);
        // vertex region
        let (q, _) = closest_point_triangle(Vec3::new(-1.0, -1.0, 0.0), A[0], A[1], A[2]);
        assert!((q - A[0]).norm() < 1e-14);
        // edge region
        let (q, w) = closest_point_triangle(Vec3::new(1.0, -2.0, 0.0), A[0], A[1], A[2]);
        assert!((q - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-14);
        assert!(w[2].abs() < 1e-14);
    }

    #[test]
    fn closest_point_matches_dense_sampling() {
        // brute-force a barycentric grid as an oracle
        let p = Vec3::new(1.4, 1.7, -0.9);
        let exact = {
            let (q, _) = closest_point_triangle(p, A[0], A[1], A[2]);
            (p - q).norm()
        };
        let mut best = f64::INFINITY;
        let n = 400;
        for i in 0..=n {
            for j in 0..=(n - i) {
                let u = i as f64 / n as f64;
                let v = j as f64 / n as f64;
                let q = A[0] * (1.0 - u - v) + A[1] * u + A[2] * v;
                best = best.min((p - q).norm());
            }
        }
        assert!(exact <= best + 1e-12);
        assert!(exact >= best - 2.0 * 2.0 / n as f64);
    }

    #[test]
    fn segment_segment() {
        // crossing in projection, 1 apart
        let (s, t) = closest_param_segment_segment(
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, -1.0, 1.0),
            Vec3::new(0.0, 1.0, 1.0),
        );
        assert!((s - 0.5).abs() < 1e-14 && (t - 0.5).abs() < 1e-14);
        // parallel
        let (s, _t) = closest_param_segment_segment(
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(2.0, 1.0, 0.0),
            Vec3::new(3.0, 1.0, 0.0),
        );
        let pa = Vec3::new(s, 0.0, 0.0);
        assert!((pa - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn ray_hits_and_misses() {
        let hit = ray_triangle(
            Vec3::new(0.5, 0.5, 5.0),
            Vec3::new(0.0, 0.0, -1.0),
            A[0],
            A[1],
            A[2],
            f64::INFINITY,
        )
        .unwrap();
        assert!((hit.t - 5.0).abs() < 1e-12);
        assert!(ray_triangle(
            Vec3::new(5.0, 5.0, 5.0),
            Vec3::new(0.0, 0.0, -1.0),
            A[0],
            A[1],
            A[2],
            f64::INFINITY
        )
        .is_none());
        // pointing away
        assert!(ray_triangle(
            Vec3::new(0.5, 0.5, 5.0),
            Vec3::new(0.0, 0.0, 1.0),
            A[0],
            A[1],
            A[2],
            f64::INFINITY
        )
        .is_none());
    }

    #[test]
    fn tri_tri_parallel_and_piercing() {
        let b: [Vec3; 3] = [
            Vec3::new(0.0, 0.0, 0.25),
            Vec3::new(2.0, 0.0, 0.25),
            Vec3::new(0.0, 2.0, 0.25),
        ];
        let (d, _, _) = triangle_triangle_closest(A, b);
        assert!((d - 0.25).abs() < 1e-12);

        // edge of b passes through A
        let b: [Vec3; 3] = [
            Vec3::new(0.5, 0.5, -1.0),
            Vec3::new(0.5, 0.5, 1.0),
            Vec3::new(3.0, 3.0, 1.0),
        ];
        let (d, wa, _) = triangle_triangle_closest(A, b);
        assert_eq!(d, 0.0);
        assert!((wa[0] + wa[1] + wa[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tri_box() {
        assert!(tri_box_overlap(
            Vec3::new(0.5, 0.5, 0.0),
            Vec3::new(0.5, 0.5, 0.5),
            A
        ));
        assert!(!tri_box_overlap(
            Vec3::new(5.0, 0.0, 0.0),
            Vec3::new(0.5, 0.5, 0.5),
            A
        ));
        // box pierced through the interior, no vertex inside
        assert!(tri_box_overlap(
            Vec3::new(0.6, 0.6, 0.0),
            Vec3::new(0.05, 0.05, 2.0),
            A
        ));
    }

    #[test]
    fn aabb_distances() {
        let d = aabb_distance(
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(3.0, 1.0, 1.0),
        );
        assert!((d - 1.0).abs() < 1e-14);
        assert_eq!(
            point_aabb_distance(Vec3::new(0.5, 0.5, 0.5), Vec3::zeros(), Vec3::repeat(1.0)),
            0.0
        );
    }
}
