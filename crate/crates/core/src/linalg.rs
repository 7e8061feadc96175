//! Vector kernels and conjugate gradients shared by the solvers.
//!
//! Reductions are evaluated as fixed-size chunk partial sums added in chunk
//! order, so results do not depend on the rayon thread count.

use rayon::prelude::*;

const CHUNK: usize = 8192;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a.len() <= CHUNK {
        return a.iter().zip(b).map(|(x, y)| x * y).sum();
    }
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect();
    partial.iter().sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sum(a: &[f64]) -> f64 {
    if a.len() <= CHUNK {
        return a.iter().sum();
    }
    let partial: Vec<f64> = a.par_chunks(CHUNK).map(|x| x.iter().sum::<f64>()).collect();
    partial.iter().sum()
}

/// y += alpha * x
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.par_chunks_mut(CHUNK)
        .zip(x.par_chunks(CHUNK))
        .for_each(|(yc, xc)| {
            for (yi, xi) in yc.iter_mut().zip(xc) {
                *yi += alpha * xi;
            }
        });
}

/// p = r + beta * p
fn xpby(r: &[f64], beta: f64, p: &mut [f64]) {
    p.par_chunks_mut(CHUNK)
        .zip(r.par_chunks(CHUNK))
        .for_each(|(pc, rc)| {
            for (pi, ri) in pc.iter_mut().zip(rc) {
                *pi = ri + beta * *pi;
            }
        });
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    x.par_chunks_mut(CHUNK)
        .for_each(|c| c.iter_mut().for_each(|v| *v *= alpha));
}

/// Subtract the arithmetic mean of `x` in place.
pub fn remove_mean(x: &mut [f64]) {
    if x.is_empty() {
        return;
    }
    let mean = sum(x) / x.len() as f64;
    x.par_chunks_mut(CHUNK)
        .for_each(|c| c.iter_mut().for_each(|v| *v -= mean));
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    /// Final residual norm `||b - A x||` (recurrence estimate).
    pub residual: f64,
    pub converged: bool,
}

/// Conjugate gradients for a symmetric positive (semi)definite operator.
///
/// Stops once `||r|| <= max(rtol * ||b||, atol)`. When `project` is given it
/// is applied to the right-hand side and to every residual, which restricts
/// the iteration to the complement of a known kernel.
pub fn conjugate_gradient<A, P>(
    mut apply: A,
    b: &[f64],
    x: &mut [f64],
    rtol: f64,
    atol: f64,
    max_iterations: usize,
    project: Option<P>,
) -> CgOutcome
where
    A: FnMut(&[f64], &mut [f64]),
    P: Fn(&mut [f64]),
{
    let n = b.len();
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut b_norm = norm(b);
    if let Some(proj) = &project {
        proj(&mut r);
        let mut bp = b.to_vec();
        proj(&mut bp);
        b_norm = norm(&bp);
    }
    let threshold = (rtol * b_norm).max(atol);
    let mut rr = dot(&r, &r);
    if rr.sqrt() <= threshold {
        return CgOutcome {
            iterations: 0,
            residual: rr.sqrt(),
            converged: true,
        };
    }
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    for it in 1..=max_iterations {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return CgOutcome {
                iterations: it,
                residual: rr.sqrt(),
                converged: false,
            };
        }
        let alpha = rr / pap;
        axpy(alpha, &p, x);
        axpy(-alpha, &ap, &mut r);
        if let Some(proj) = &project {
            proj(&mut r);
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= threshold {
            return CgOutcome {
                iterations: it,
                residual: rr_new.sqrt(),
                converged: true,
            };
        }
        xpby(&r, rr_new / rr, &mut p);
        rr = rr_new;
    }
    CgOutcome {
        iterations: max_iterations,
        residual: rr.sqrt(),
        converged: false,
    }
}

/// Placeholder type for `conjugate_gradient` calls without a projection.
pub type NoProjection = fn(&mut [f64]);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cg_solves_tridiagonal() {
        let n = 50;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let l = if i > 0 { x[i - 1] } else { 0.0 };
                let r = if i + 1 < n { x[i + 1] } else { 0.0 };
                y[i] = 2.0 * x[i] - l - r;
            }
        };
        let b = vec![1.0; n];
        let mut x = vec![0.0; n];
        let out = conjugate_gradient(apply, &b, &mut x, 1e-12, 0.0, 500, None::<NoProjection>);
        assert!(out.converged);
        // exact solution x_i = (i+1)(n-i)/2
        for (i, xi) in x.iter().enumerate() {
            let exact = ((i + 1) * (n - i)) as f64 / 2.0;
            assert!((xi - exact).abs() < 1e-8 * exact);
        }
    }

    #[test]
    fn reductions_are_chunk_order_deterministic() {
        let v: Vec<f64> = (0..100_000).map(|i| ((i as f64) * 0.37).sin()).collect();
        let a = dot(&v, &v);
        let b = dot(&v, &v);
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
