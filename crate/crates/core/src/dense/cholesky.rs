use super::{axpy, dot, DenseMatrix};
use crate::error::{check_len, Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;

/// Lower-triangular factor `L` with `S = LLᵀ`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    lower: DenseMatrix,
}

/// Cholesky factorization of a symmetric positive definite matrix.
///
/// A non-positive pivot yields [`Error::NotPositiveDefinite`], which callers
/// also use as the SPD test.
pub fn cholesky(s: &DenseMatrix) -> Result<CholeskyFactor> {
    if !s.is_square() {
        return Err(Error::InvalidArgument("cholesky needs a square matrix".into()));
    }
    let asym = s.asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(Error::Asymmetric(asym));
    }
    let n = s.nrows();
    let mut l = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let (done, rest) = l.values_split_at_row(i);
        let row_i = &mut rest[..n];
        for j in 0..=i {
            let sum = if j < i {
                let row_j = &done[j * n..j * n + j];
                s[(i, j)] - dot(&row_i[..j], row_j)
            } else {
                s[(i, i)] - dot(&row_i[..i], &row_i[..i])
            };
            if j == i {
                if !(sum > 0.0) {
                    return Err(Error::NotPositiveDefinite { pivot: i, value: sum });
                }
                row_i[i] = sum.sqrt();
            } else {
                row_i[j] = sum / done[j * n + j];
            }
        }
    }
    Ok(CholeskyFactor { lower: l })
}

impl CholeskyFactor {
    pub fn order(&self) -> usize {
        self.lower.nrows()
    }

    pub fn lower(&self) -> &DenseMatrix {
        &self.lower
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        check_len("cholesky_solve", self.order(), rhs.len())?;
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        Ok(x)
    }

    /// Overwrites `x` with `S⁻¹x`. Length is the caller's responsibility.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        self.forward_in_place(x);
        self.backward_in_place(x);
    }

    /// `x ← L⁻¹x`.
    pub fn forward_in_place(&self, x: &mut [f64]) {
        let n = self.order();
        for i in 0..n {
            let row = self.lower.row(i);
            x[i] = (x[i] - dot(&row[..i], &x[..i])) / row[i];
        }
    }

    /// `x ← L⁻ᵀx`, column oriented so that rows of `L` are read contiguously.
    pub fn backward_in_place(&self, x: &mut [f64]) {
        let n = self.order();
        for i in (0..n).rev() {
            let row = self.lower.row(i);
            x[i] /= row[i];
            let xi = x[i];
            axpy(-xi, &row[..i], &mut x[..i]);
        }
    }

    /// `L⁻¹M` for a matrix with `order` rows.
    pub fn forward_matrix(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        check_len("cholesky forward_matrix", self.order(), m.nrows())?;
        let n = self.order();
        let w = m.ncols();
        let mut x = m.clone();
        for i in 0..n {
            let lrow = self.lower.row(i);
            let (done, rest) = x.values_split_at_row(i);
            let xi = &mut rest[..w];
            for (k, &lik) in lrow[..i].iter().enumerate() {
                if lik != 0.0 {
                    axpy(-lik, &done[k * w..(k + 1) * w], xi);
                }
            }
            let d = lrow[i];
            xi.iter_mut().for_each(|v| *v /= d);
        }
        Ok(x)
    }

    /// `L⁻ᵀM` for a matrix with `order` rows.
    pub fn backward_matrix(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        check_len("cholesky backward_matrix", self.order(), m.nrows())?;
        let n = self.order();
        let w = m.ncols();
        let mut x = m.clone();
        for i in (0..n).rev() {
            let lrow = self.lower.row(i);
            let d = lrow[i];
            let (head, tail) = x.values_split_at_row(i);
            let xi = &mut tail[..w];
            xi.iter_mut().for_each(|v| *v /= d);
            for (k, &lik) in lrow[..i].iter().enumerate() {
                if lik != 0.0 {
                    axpy(-lik, xi, &mut head[k * w..(k + 1) * w]);
                }
            }
        }
        Ok(x)
    }

    /// `S⁻¹M` for a matrix with `order` rows.
    pub fn solve_matrix(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        let y = self.forward_matrix(m)?;
        self.backward_matrix(&y)
    }

    /// `L⁻¹ M L⁻ᵀ` for symmetric `M`, symmetrized against rounding.
    pub fn congruence_inverse(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        let y = self.forward_matrix(m)?;
        let mut z = self.forward_matrix(&y.transpose())?;
        z.symmetrize();
        Ok(z)
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        self.lower.matmul(&self.lower.transpose()).expect("square factor")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_factorization() {
        let s = DenseMatrix::from_rows(&[&[4.0, 2.0], &[2.0, 5.0]]).unwrap();
        let f = cholesky(&s).unwrap();
        assert_eq!(f.lower().values(), &[2.0, 0.0, 1.0, 2.0]);
        let x = f.solve(&[6.0, 7.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_factor() {
        let f = cholesky(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(f.lower(), &DenseMatrix::identity(3));
        assert_eq!(f.solve(&[1.0, -2.0, 3.0]).unwrap(), vec![1.0, -2.0, 3.0]);
        assert!(f.solve(&[1.0]).is_err());
    }

    #[test]
    fn indefinite_rejected() {
        let s = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        assert!(matches!(cholesky(&s), Err(Error::NotPositiveDefinite { pivot: 1, .. })));
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(cholesky(&a), Err(Error::Asymmetric(_))));
    }

    #[test]
    fn matrix_solves_agree_with_vector_solves() {
        let s = DenseMatrix::from_rows(&[&[4.0, 1.0, 0.5], &[1.0, 3.0, 0.2], &[0.5, 0.2, 2.0]]).unwrap();
        let f = cholesky(&s).unwrap();
        let m = DenseMatrix::from_rows(&[&[1.0, 2.0], &[0.0, -1.0], &[3.0, 0.5]]).unwrap();
        let x = f.solve_matrix(&m).unwrap();
        for j in 0..2 {
            let col = f.solve(&m.column(j)).unwrap();
            for i in 0..3 {
                assert!((x[(i, j)] - col[i]).abs() < 1e-14);
            }
        }
    }
}
