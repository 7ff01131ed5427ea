use super::{axpy, dot, norm2};
use crate::sparse::power_start_vector;

/// Extreme Ritz values of a symmetric operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosResult {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    pub converged: bool,
}

/// Which extreme Ritz values must settle before Lanczos stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LanczosTarget {
    Both,
    Min,
    Max,
}

/// Lanczos with full reorthogonalisation for the extreme eigenvalues of a
/// symmetric operator of order `n`.
///
/// Stops when the targeted extreme Ritz values each change by less than `tol`
/// relative to themselves over three consecutive steps, when the Krylov space
/// becomes invariant, or after `max_steps`.
pub fn lanczos_extremes<F>(n: usize, mut apply: F, max_steps: usize, tol: f64, target: LanczosTarget) -> LanczosResult
where
    F: FnMut(&[f64], &mut [f64]),
{
    let max_steps = max_steps.min(n).max(1);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_steps);
    let mut alpha = Vec::with_capacity(max_steps);
    let mut beta: Vec<f64> = Vec::with_capacity(max_steps);
    let mut v = power_start_vector(n);
    let mut w = vec![0.0; n];
    let (mut lo, mut hi) = (f64::NAN, f64::NAN);
    let mut stable = 0;

    for k in 0..max_steps {
        apply(&v, &mut w);
        let a = dot(&v, &w);
        alpha.push(a);
        basis.push(v.clone());
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                axpy(-c, q, &mut w);
            }
        }
        let (new_lo, new_hi) = tridiagonal_extremes(&alpha, &beta);
        let scale = new_hi.abs().max(new_lo.abs()).max(f64::MIN_POSITIVE);
        let lo_ok = (new_lo - lo).abs() <= tol * new_lo.abs();
        let hi_ok = (new_hi - hi).abs() <= tol * new_hi.abs();
        let settled = match target {
            LanczosTarget::Both => lo_ok && hi_ok,
            LanczosTarget::Min => lo_ok,
            LanczosTarget::Max => hi_ok,
        };
        if k > 0 && settled {
            stable += 1;
        } else {
            stable = 0;
        }
        lo = new_lo;
        hi = new_hi;
        let b = norm2(&w);
        if stable >= 3 || b <= 1e-14 * scale {
            return LanczosResult {
                min: lo,
                max: hi,
                steps: k + 1,
                converged: true,
            };
        }
        beta.push(b);
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / b;
        }
    }
    LanczosResult {
        min: lo,
        max: hi,
        steps: max_steps,
        converged: max_steps == n,
    }
}

/// Smallest and largest eigenvalue of the symmetric tridiagonal matrix with
/// diagonal `alpha` and off-diagonal `beta` (length `alpha.len() - 1` or more;
/// extra entries are ignored), by Sturm-sequence bisection.
fn tridiagonal_extremes(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let k = alpha.len();
    let off = |i: usize| if i + 1 < k { beta[i].abs() } else { 0.0 };
    let mut glo = f64::INFINITY;
    let mut ghi = f64::NEG_INFINITY;
    for i in 0..k {
        let r = off(i) + if i > 0 { off(i - 1) } else { 0.0 };
        glo = glo.min(alpha[i] - r);
        ghi = ghi.max(alpha[i] + r);
    }
    let lo = bisect(alpha, beta, glo, ghi, 0);
    let hi = bisect(alpha, beta, glo, ghi, k - 1);
    (lo, hi)
}

/// Number of eigenvalues strictly below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..alpha.len() {
        let b2 = if i > 0 { beta[i - 1] * beta[i - 1] } else { 0.0 };
        d = alpha[i] - x - if i > 0 { b2 / d } else { 0.0 };
        if d == 0.0 {
            d = f64::EPSILON * (alpha[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `index`-th eigenvalue (ascending, zero based) inside `[lo, hi]`.
fn bisect(alpha: &[f64], beta: &[f64], mut lo: f64, mut hi: f64, index: usize) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_operator() {
        let d: Vec<f64> = (1..=50).map(|i| i as f64).collect();
        let r = lanczos_extremes(
            50,
            |x, y| {
                for i in 0..50 {
                    y[i] = d[i] * x[i];
                }
            },
            50,
            1e-13,
            LanczosTarget::Both,
        );
        assert!((r.min - 1.0).abs() < 1e-9, "{r:?}");
        assert!((r.max - 50.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn sturm_bisection_on_laplacian() {
        let alpha = vec![2.0; 10];
        let beta = vec![-1.0; 9];
        let (lo, hi) = tridiagonal_extremes(&alpha, &beta);
        let h = std::f64::consts::PI / 11.0;
        assert!((lo - (2.0 - 2.0 * h.cos())).abs() < 1e-13);
        assert!((hi - (2.0 + 2.0 * h.cos())).abs() < 1e-13);
    }
}
