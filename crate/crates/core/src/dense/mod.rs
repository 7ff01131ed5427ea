//! Row-major dense matrices, factorizations and eigensolvers.

mod cholesky;
mod eig_general;
mod jacobi;
mod lanczos;
mod lu;

pub use cholesky::{cholesky, CholeskyFactor};
pub use eig_general::{eig_general, ComplexSpectrum, DEFAULT_CLASSIFICATION_TOL};
pub use jacobi::{eig_symmetric, eig_symmetric_vectors};
pub use lanczos::{lanczos_extremes, LanczosResult, LanczosTarget};
pub use lu::{lu, lu_solve, LuFactor};

use crate::error::{check_len, Error, Result};
use std::ops::{Index, IndexMut};

/// Largest order for which dense copies of block operators are built.
pub const DENSE_SIZE_GUARD: usize = 5000;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        DenseMatrix {
            nrows,
            ncols,
            values: vec![0.0; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_row_major(nrows: usize, ncols: usize, values: Vec<f64>) -> Result<Self> {
        check_len("row-major buffer", nrows * ncols, values.len())?;
        Ok(DenseMatrix { nrows, ncols, values })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut values = Vec::with_capacity(nrows * ncols);
        for r in rows {
            check_len("row length", ncols, r.len())?;
            values.extend_from_slice(r);
        }
        Ok(DenseMatrix { nrows, ncols, values })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.nrows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[f64]) {
        for (i, &v) in col.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                t.values[j * self.nrows + i] = self.values[i * self.ncols + j];
            }
        }
        t
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("dense matvec", self.ncols, x.len())?;
        Ok((0..self.nrows).map(|i| dot(self.row(i), x)).collect())
    }

    pub fn matvec_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("dense matvec_transpose", self.nrows, x.len())?;
        let mut y = vec![0.0; self.ncols];
        for (i, &xi) in x.iter().enumerate() {
            axpy(xi, self.row(i), &mut y);
        }
        Ok(y)
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        check_len("matmul inner dimension", self.ncols, other.nrows)?;
        let mut out = DenseMatrix::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            let out_row = &mut out.values[i * other.ncols..(i + 1) * other.ncols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a != 0.0 {
                    axpy(a, other.row(k), out_row);
                }
            }
        }
        Ok(out)
    }

    /// `alpha·self + beta·other`.
    pub fn add_scaled(&self, alpha: f64, other: &DenseMatrix, beta: f64) -> Result<DenseMatrix> {
        check_len("add rows", self.nrows, other.nrows)?;
        check_len("add cols", self.ncols, other.ncols)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| alpha * a + beta * b).collect();
        Ok(DenseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            values,
        })
    }

    pub fn scale(&self, c: f64) -> DenseMatrix {
        DenseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.nrows.min(self.ncols)).map(|i| self[(i, i)]).sum()
    }

    /// `max|M - Mᵀ| / max|M|`; infinite for rectangular input.
    pub fn asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..self.nrows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst / scale
    }

    /// Replaces the matrix by `(M + Mᵀ)/2`.
    pub fn symmetrize(&mut self) {
        let n = self.nrows;
        for i in 0..n {
            for j in 0..i {
                let avg = 0.5 * (self.values[i * n + j] + self.values[j * n + i]);
                self.values[i * n + j] = avg;
                self.values[j * n + i] = avg;
            }
        }
    }

    /// Rows before `i` and rows from `i` on, as two disjoint slices.
    pub(crate) fn values_split_at_row(&mut self, i: usize) -> (&mut [f64], &mut [f64]) {
        let at = i * self.ncols;
        self.values.split_at_mut(at)
    }

    /// Copies `block` into `self` with its top-left corner at `(row, col)`.
    pub fn set_block(&mut self, row: usize, col: usize, block: &DenseMatrix) {
        for i in 0..block.nrows {
            let start = (row + i) * self.ncols + col;
            self.values[start..start + block.ncols].copy_from_slice(block.row(i));
        }
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.values[i * self.ncols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.values[i * self.ncols + j]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators let the compiler vectorise without reassociation
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut sum = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        sum += a[k] * b[k];
    }
    sum
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Eigenvalues of `T⁻¹S` for symmetric `S` and SPD `T`, ascending.
pub fn gen_eig_spd(s: &DenseMatrix, t: &DenseMatrix) -> Result<Vec<f64>> {
    check_len("gen_eig_spd order", t.nrows(), s.nrows())?;
    let l = cholesky(t)?;
    let reduced = l.congruence_inverse(s)?;
    eig_symmetric(&reduced)
}

/// Spectral condition number `√(λmax(MᵀM)/λmin(MᵀM))`.
pub fn cond2(m: &DenseMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::InvalidArgument("cond2 needs a square matrix".into()));
    }
    let mut gram = m.transpose().matmul(m)?;
    gram.symmetrize();
    let ev = eig_symmetric(&gram)?;
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    if hi <= 0.0 || lo <= hi * f64::EPSILON * m.nrows() as f64 {
        return Err(Error::Singular);
    }
    Ok((hi / lo).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cond_of_diagonal() {
        assert!((cond2(&DenseMatrix::identity(5)).unwrap() - 1.0).abs() < 1e-14);
        assert!((cond2(&DenseMatrix::from_diagonal(&[1.0, 10.0])).unwrap() - 10.0).abs() < 1e-12);
        assert!(matches!(cond2(&DenseMatrix::from_diagonal(&[1.0, 0.0])), Err(Error::Singular)));
    }

    #[test]
    fn generalized_diagonal() {
        let s = DenseMatrix::from_diagonal(&[2.0, 8.0]);
        let t = DenseMatrix::from_diagonal(&[1.0, 4.0]);
        let ev = gen_eig_spd(&s, &t).unwrap();
        assert!((ev[0] - 2.0).abs() < 1e-14 && (ev[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn matmul_and_transpose() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]).unwrap();
        let g = a.matmul(&a.transpose()).unwrap();
        assert_eq!(g.values(), &[14.0, 32.0, 32.0, 77.0]);
        assert_eq!(a.matvec_transpose(&[1.0, 1.0]).unwrap(), vec![5.0, 7.0, 9.0]);
    }
}
