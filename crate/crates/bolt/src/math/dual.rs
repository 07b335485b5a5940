//! Forward-mode dual numbers with a fixed derivative width.
//!
//! Used for force terms whose energies are awkward to differentiate by hand
//! (the per-triangle curvature construction in particular). The derivative is
//! exact, so analytic-vs-finite-difference checks exercise a genuinely
//! independent code path.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar abstraction so an energy can be written once and evaluated either
/// plainly (`f64`) or with derivatives (`Dual<N>`).
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(v: f64) -> Self;
    fn value(self) -> f64;
    fn sqrt(self) -> Self;
}

impl Real for f64 {
    fn constant(v: f64) -> Self {
        v
    }
    fn value(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Dual<const N: usize> {
    pub re: f64,
    pub eps: [f64; N],
}

impl<const N: usize> Dual<N> {
    pub fn variable(v: f64, lane: usize) -> Self {
        let mut eps = [0.0; N];
        eps[lane] = 1.0;
        Dual { re: v, eps }
    }
}

impl<const N: usize> Real for Dual<N> {
    fn constant(v: f64) -> Self {
        Dual {
            re: v,
            eps: [0.0; N],
        }
    }
    fn value(self) -> f64 {
        self.re
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        let d = if s > 0.0 { 0.5 / s } else { 0.0 };
        let mut eps = [0.0; N];
        for i in 0..N {
            eps[i] = self.eps[i] * d;
        }
        Dual { re: s, eps }
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut eps = [0.0; N];
        for i in 0..N {
            eps[i] = self.eps[i] + rhs.eps[i];
        }
        Dual {
            re: self.re + rhs.re,
            eps,
        }
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut eps = [0.0; N];
        for i in 0..N {
            eps[i] = self.eps[i] - rhs.eps[i];
        }
        Dual {
            re: self.re - rhs.re,
            eps,
        }
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut eps = [0.0; N];
        for i in 0..N {
            eps[i] = self.eps[i] * rhs.re + self.re * rhs.eps[i];
        }
        Dual {
            re: self.re * rhs.re,
            eps,
        }
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let inv = 1.0 / rhs.re;
        let re = self.re * inv;
        let mut eps = [0.0; N];
        for i in 0..N {
            eps[i] = (self.eps[i] - re * rhs.eps[i]) * inv;
        }
        Dual { re, eps }
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut eps = [0.0; N];
        for i in 0..N {
            eps[i] = -self.eps[i];
        }
        Dual { re: -self.re, eps }
    }
}

// --- tiny generic 3-vector helpers used by scalar-generic energies ---

pub type V3<S> = [S; 3];

pub fn v3<S: Real>(x: f64, y: f64, z: f64) -> V3<S> {
    [S::constant(x), S::constant(y), S::constant(z)]
}

pub fn add3<S: Real>(a: V3<S>, b: V3<S>) -> V3<S> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub3<S: Real>(a: V3<S>, b: V3<S>) -> V3<S> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale3<S: Real>(a: V3<S>, s: S) -> V3<S> {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot3<S: Real>(a: V3<S>, b: V3<S>) -> S {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3<S: Real>(a: V3<S>, b: V3<S>) -> V3<S> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm3<S: Real>(a: V3<S>) -> S {
    dot3(a, a).sqrt()
}

pub fn normalize3<S: Real>(a: V3<S>) -> V3<S> {
    let n = norm3(a);
    let inv = S::constant(1.0) / n;
    scale3(a, inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_product_and_sqrt() {
        // f(a, b) = sqrt(a*b) + a/b at (a,b) = (4, 2)
        let a = Dual::<2>::variable(4.0, 0);
        let b = Dual::<2>::variable(2.0, 1);
        let f = (a * b).sqrt() + a / b;
        let fv = (8.0f64).sqrt() + 2.0;
        assert!((f.re - fv).abs() < 1e-14);
        // df/da = b / (2 sqrt(ab)) + 1/b
        let dfda = 2.0 / (2.0 * (8.0f64).sqrt()) + 0.5;
        // df/db = a / (2 sqrt(ab)) - a/b^2
        let dfdb = 4.0 / (2.0 * (8.0f64).sqrt()) - 1.0;
        assert!((f.eps[0] - dfda).abs() < 1e-12);
        assert!((f.eps[1] - dfdb).abs() < 1e-12);
    }

    #[test]
    fn vector_ops_match_nalgebra() {
        let a = [1.0f64, 2.0, 3.0];
        let b = [-2.0f64, 0.5, 1.0];
        let c = cross3(a, b);
        let n =
            nalgebra::Vector3::new(1.0, 2.0, 3.0).cross(&nalgebra::Vector3::new(-2.0, 0.5, 1.0));
        assert!((c[0] - n.x).abs() < 1e-15);
        assert!((c[1] - n.y).abs() < 1e-15);
        assert!((c[2] - n.z).abs() < 1e-15);
        assert!((norm3(a) - 14.0f64.sqrt()).abs() < 1e-15);
    }
}
