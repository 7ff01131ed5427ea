use super::DenseMatrix;
use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const OFF_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn eig_symmetric(s: &DenseMatrix) -> Result<Vec<f64>> {
    jacobi(s, false).map(|(values, _)| values)
}

/// Eigenvalues (ascending) and orthonormal eigenvectors stored as columns.
pub fn eig_symmetric_vectors(s: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    jacobi(s, true).map(|(values, vectors)| (values, vectors.expect("requested")))
}

fn jacobi(s: &DenseMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<DenseMatrix>)> {
    if !s.is_square() {
        return Err(Error::InvalidArgument("eig_symmetric needs a square matrix".into()));
    }
    let asym = s.asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(Error::Asymmetric(asym));
    }
    let n = s.nrows();
    let mut a = s.clone();
    a.symmetrize();
    // rows of vt are the eigenvectors, which keeps the rotation updates contiguous
    let mut vt = want_vectors.then(|| DenseMatrix::identity(n));
    let threshold = OFF_TOL * s.frobenius_norm();

    let mut converged = n <= 1;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.is_finite() {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                } else {
                    0.0
                };
                if t == 0.0 {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                rotate(&mut a, p, q, c, sn);
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                if let Some(v) = vt.as_mut() {
                    rotate_rows(v, p, q, c, sn);
                }
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > threshold {
        return Err(Error::ConvergenceFailure(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = vt.map(|v| {
        let mut out = DenseMatrix::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            out.set_column(col, v.row(i));
        }
        out
    });
    Ok((values, vectors))
}

fn off_diagonal_norm(a: &DenseMatrix) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for (j, v) in a.row(i).iter().enumerate() {
            if i != j {
                sum += v * v;
            }
        }
    }
    sum.sqrt()
}

/// `A ← JᵀAJ` for the plane rotation in (p, q); diagonal and (p, q) entries are fixed up by the caller.
fn rotate(a: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.nrows();
    rotate_rows(a, p, q, c, s);
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
}

/// Rotates rows `p < q` in place.
fn rotate_rows(a: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let ncols = a.ncols();
    let (head, tail) = a.values_split_at_row(q);
    let row_p = &mut head[p * ncols..(p + 1) * ncols];
    let row_q = &mut tail[..ncols];
    for (x, y) in row_p.iter_mut().zip(row_q.iter_mut()) {
        let xp = *x;
        let xq = *y;
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}
