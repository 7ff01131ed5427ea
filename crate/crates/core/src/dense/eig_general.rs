//! Eigenvalues of general real matrices: Householder reduction to upper
//! Hessenberg form followed by the Francis double-shift QR iteration
//! (the eigenvalue-only branch of the EISPACK `hqr` scheme).

use super::{axpy, dot, DenseMatrix};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const DEFAULT_CLASSIFICATION_TOL: f64 = 1e-8;

/// Eigenvalues of a real matrix, unordered.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexSpectrum {
    pub eigenvalues: Vec<Complex64>,
    pub classification_tol: f64,
}

impl ComplexSpectrum {
    pub fn new(eigenvalues: Vec<Complex64>) -> Self {
        ComplexSpectrum {
            eigenvalues,
            classification_tol: DEFAULT_CLASSIFICATION_TOL,
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `|im| ≤ tol·max(1, |re|)`.
    pub fn is_real(&self, z: Complex64) -> bool {
        z.im.abs() <= self.classification_tol * z.re.abs().max(1.0)
    }

    pub fn real(&self) -> Vec<f64> {
        self.eigenvalues.iter().filter(|z| self.is_real(**z)).map(|z| z.re).collect()
    }

    pub fn non_real(&self) -> Vec<Complex64> {
        self.eigenvalues.iter().copied().filter(|z| !self.is_real(*z)).collect()
    }

    pub fn sum(&self) -> Complex64 {
        self.eigenvalues.iter().sum()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Eigenvalues sorted by real part, then imaginary part.
    pub fn sorted(&self) -> Vec<Complex64> {
        let mut v = self.eigenvalues.clone();
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }
}

pub fn eig_general(m: &DenseMatrix) -> Result<ComplexSpectrum> {
    if !m.is_square() {
        return Err(Error::InvalidArgument("eig_general needs a square matrix".into()));
    }
    let mut h = m.clone();
    hessenberg_in_place(&mut h);
    hqr(&mut h).map(ComplexSpectrum::new)
}

/// Householder reduction to upper Hessenberg form; entries below the
/// subdiagonal are set to exactly zero.
pub(crate) fn hessenberg_in_place(h: &mut DenseMatrix) {
    let n = h.nrows();
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];
    let mut f = vec![0.0; n];
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;

        // H ← (I − u uᵀ/h) H, restricted to columns m.. ; row-oriented accumulation
        let fw = &mut f[m..n];
        fw.iter_mut().for_each(|v| *v = 0.0);
        for i in m..=high {
            axpy(ort[i], &h.row(i)[m..n], fw);
        }
        fw.iter_mut().for_each(|v| *v /= hh);
        for i in m..=high {
            let oi = ort[i];
            axpy(-oi, fw, &mut h.row_mut(i)[m..n]);
        }

        // H ← H (I − u uᵀ/h)
        for i in 0..n {
            let row = h.row_mut(i);
            let fi = dot(&ort[m..=high], &row[m..=high]) / hh;
            axpy(-fi, &ort[m..=high], &mut row[m..=high]);
        }

        ort[m] *= scale;
        h[(m, m - 1)] = scale * g;
        for i in m + 1..n {
            h[(i, m - 1)] = 0.0;
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix (destroyed in the process).
fn hqr(h: &mut DenseMatrix) -> Result<Vec<Complex64>> {
    let nn = h.nrows();
    let mut out = vec![Complex64::new(0.0, 0.0); nn];
    if nn == 0 {
        return Ok(out);
    }
    let eps = f64::EPSILON;
    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }
    let max_total = 100 * nn.max(1);
    let mut total = 0usize;

    let mut n = nn as isize - 1;
    let mut exshift = 0.0;
    let mut iter = 0usize;
    let (mut p, mut q, mut r, mut s, mut z);
    let (mut w, mut x, mut y);

    while n >= 0 {
        let nu = n as usize;
        // look for a single small subdiagonal element
        let mut l = nu;
        while l > 0 {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == nu {
            out[nu] = Complex64::new(h[(nu, nu)] + exshift, 0.0);
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            x = h[(nu, nu)] + exshift;
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                let hi = x + z;
                let lo = if z != 0.0 { x - w / z } else { hi };
                out[nu - 1] = Complex64::new(hi, 0.0);
                out[nu] = Complex64::new(lo, 0.0);
            } else {
                out[nu - 1] = Complex64::new(x + p, z);
                out[nu] = Complex64::new(x + p, -z);
            }
            n -= 2;
            iter = 0;
        } else {
            total += 1;
            if total > max_total {
                return Err(Error::ConvergenceFailure(total));
            }
            x = h[(nu, nu)];
            y = h[(nu - 1, nu - 1)];
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];

            // exceptional shifts
            if iter == 10 {
                exshift += x;
                for i in 0..=nu {
                    h[(i, i)] -= x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in 0..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;

            // look for two consecutive small subdiagonal elements
            let mut m = nu - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let lhs = h[(m, m - 1)].abs() * (q.abs() + r.abs());
                let rhs = eps * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()));
                if lhs < rhs {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                h[(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            // double QR step on rows l..=n and columns m..=n
            for k in m..nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        h[(k, k - 1)] = -s * x;
                    } else if l != m {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    for j in k..=nu {
                        let mut pp = h[(k, j)] + q * h[(k + 1, j)];
                        if notlast {
                            pp += r * h[(k + 2, j)];
                            h[(k + 2, j)] -= pp * z;
                        }
                        h[(k, j)] -= pp * x;
                        h[(k + 1, j)] -= pp * y;
                    }
                    for i in l..=nu.min(k + 3) {
                        let mut pp = x * h[(i, k)] + y * h[(i, k + 1)];
                        if notlast {
                            pp += z * h[(i, k + 2)];
                            h[(i, k + 2)] -= pp * r;
                        }
                        h[(i, k)] -= pp;
                        h[(i, k + 1)] -= pp * q;
                    }
                }
            }
        }
    }
    Ok(out)
}
