#[derive(Debug, Clone, Copy)]
pub struct CgOutcome {
    pub iterations: u32,
    pub relative_residual: f64,
    pub converged: bool,
}

/// Conjugate gradient on a matrix-free SPD operator.
///
/// `apply(x, y)` must write `y = M x`. Converges when the residual drops below
/// `tol` relative to `‖b‖`; a zero right-hand side returns the zero solution
/// immediately. `x` is taken as the initial guess.
pub fn conjugate_gradient<F>(
    apply: F,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iters: u32,
) -> CgOutcome
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    assert_eq!(x.len(), n);
    let norm_b = norm(b);
    if norm_b == 0.0 {
        x.fill(0.0);
        return CgOutcome {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }

    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);

    let mut iterations = 0;
    while iterations < max_iters {
        if rr.sqrt() <= tol * norm_b {
            break;
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            // not SPD (or numerically exhausted): stop with what we have
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_next;
        iterations += 1;
    }

    let relative_residual = rr.sqrt() / norm_b;
    CgOutcome {
        iterations,
        relative_residual,
        converged: relative_residual <= tol,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_spd() {
        // [[4,1],[1,3]] x = [1,2]
        let apply = |x: &[f64], y: &mut [f64]| {
            y[0] = 4.0 * x[0] + x[1];
            y[1] = x[0] + 3.0 * x[1];
        };
        let mut x = vec![0.0; 2];
        let out = conjugate_gradient(apply, &[1.0, 2.0], &mut x, 1e-12, 50);
        assert!(out.converged);
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-10);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-10);
    }

    #[test]
    fn zero_rhs_short_circuits() {
        let apply = |x: &[f64], y: &mut [f64]| y.copy_from_slice(x);
        let mut x = vec![3.0, -2.0];
        let out = conjugate_gradient(apply, &[0.0, 0.0], &mut x, 1e-10, 10);
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
        assert_eq!(x, vec![0.0, 0.0]);
    }
}
