//! Preconditioners: the generalized shift-splitting family, the exact block
//! diagonal baseline and a dense exact inverse used as an oracle.

mod bd;
mod config;
mod gss;

pub use bd::{BdPreconditioner, BlockEliminationSolver};
pub use config::{make_config, GssConfig, GssKind, GssSpec};
pub(crate) use gss::dense_q;
pub use gss::{splitting_residual, BuildStrategy, GssPreconditioner};

use crate::dense::{cholesky, lu, CholeskyFactor, DenseMatrix, LuFactor};
use crate::error::{check_len, Error, Result};
use crate::sparse::SparseMatrix;
use crate::system::SaddlePointSystem;

/// Action of `P⁻¹` (and `P⁻ᵀ`) on flat vectors of length [`order`](Self::order).
pub trait Preconditioner {
    fn order(&self) -> usize;

    /// `out = P⁻¹ r`.
    fn apply_flat(&self, r: &[f64], out: &mut [f64]);

    /// `out = P⁻ᵀ r`.
    fn apply_transpose_flat(&self, r: &[f64], out: &mut [f64]);

    fn label(&self) -> String;

    fn apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        check_len("preconditioner apply", self.order(), r.len())?;
        let mut out = vec![0.0; r.len()];
        self.apply_flat(r, &mut out);
        Ok(out)
    }
}

/// A symmetric positive definite block such as Λ1, Λ2 or Λ3.
#[derive(Debug, Clone, PartialEq)]
pub enum SpdOperator {
    /// The zero block (only allowed for Λ1).
    Zero,
    Diagonal(Vec<f64>),
    Matrix(SparseMatrix),
}

impl SpdOperator {
    pub fn scaled_identity(n: usize, c: f64) -> Self {
        SpdOperator::Diagonal(vec![c; n])
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, SpdOperator::Zero)
    }

    /// Order of the block, or `None` for the dimensionless zero block.
    pub fn order(&self) -> Option<usize> {
        match self {
            SpdOperator::Zero => None,
            SpdOperator::Diagonal(d) => Some(d.len()),
            SpdOperator::Matrix(m) => Some(m.nrows()),
        }
    }

    pub fn scale(&self, c: f64) -> SpdOperator {
        match self {
            SpdOperator::Zero => SpdOperator::Zero,
            SpdOperator::Diagonal(d) => SpdOperator::Diagonal(d.iter().map(|v| c * v).collect()),
            SpdOperator::Matrix(m) => SpdOperator::Matrix(m.scale(c)),
        }
    }

    pub fn to_sparse(&self, n: usize) -> SparseMatrix {
        match self {
            SpdOperator::Zero => SparseMatrix::zeros(n, n),
            SpdOperator::Diagonal(d) => SparseMatrix::from_diagonal(d),
            SpdOperator::Matrix(m) => m.clone(),
        }
    }

    pub fn to_dense(&self, n: usize) -> DenseMatrix {
        self.to_sparse(n).to_dense()
    }

    /// `y = Λx`.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        match self {
            SpdOperator::Zero => y.iter_mut().for_each(|v| *v = 0.0),
            SpdOperator::Diagonal(d) => {
                for ((yi, xi), di) in y.iter_mut().zip(x).zip(d) {
                    *yi = di * xi;
                }
            }
            SpdOperator::Matrix(m) => m.matvec_into(x, y),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        match self {
            SpdOperator::Zero => 0.0,
            SpdOperator::Diagonal(d) => d.iter().map(|v| v * v).sum::<f64>().sqrt(),
            SpdOperator::Matrix(m) => m.frobenius_norm(),
        }
    }

    /// `tr(ΛM)` for a square sparse `M` of the same order.
    pub fn trace_product(&self, m: &SparseMatrix) -> f64 {
        match self {
            SpdOperator::Zero => 0.0,
            SpdOperator::Diagonal(d) => d.iter().enumerate().map(|(i, di)| di * m.get(i, i)).sum(),
            SpdOperator::Matrix(l) => {
                let mut sum = 0.0;
                for i in 0..l.nrows() {
                    let (cols, vals) = l.row(i);
                    for (&j, &v) in cols.iter().zip(vals) {
                        sum += v * m.get(j, i);
                    }
                }
                sum
            }
        }
    }

    /// Factor for solves; fails unless the block is SPD.
    pub fn factor(&self) -> Result<SpdFactor> {
        match self {
            SpdOperator::Zero => Err(Error::InvalidArgument("the zero block cannot be factorized".into())),
            SpdOperator::Diagonal(d) => {
                if let Some((i, &v)) = d.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
                    return Err(Error::NotPositiveDefinite { pivot: i, value: v });
                }
                Ok(SpdFactor::Diagonal(d.clone()))
            }
            SpdOperator::Matrix(m) => Ok(SpdFactor::Cholesky(cholesky(&m.to_dense())?)),
        }
    }
}

/// Factorized SPD block.
#[derive(Debug, Clone)]
pub enum SpdFactor {
    Diagonal(Vec<f64>),
    Cholesky(CholeskyFactor),
}

impl SpdFactor {
    pub fn order(&self) -> usize {
        match self {
            SpdFactor::Diagonal(d) => d.len(),
            SpdFactor::Cholesky(f) => f.order(),
        }
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        match self {
            SpdFactor::Diagonal(d) => {
                for (xi, di) in x.iter_mut().zip(d) {
                    *xi /= di;
                }
            }
            SpdFactor::Cholesky(f) => f.solve_in_place(x),
        }
    }

    /// `Λ⁻¹M` for a dense matrix with `order` rows.
    pub fn solve_matrix(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        match self {
            SpdFactor::Diagonal(d) => {
                check_len("diagonal solve_matrix", d.len(), m.nrows())?;
                let mut out = m.clone();
                for (i, di) in d.iter().enumerate() {
                    out.row_mut(i).iter_mut().for_each(|v| *v /= di);
                }
                Ok(out)
            }
            SpdFactor::Cholesky(f) => f.solve_matrix(m),
        }
    }
}

/// `S·D` for sparse `S` and dense `D`, returned dense.
pub(crate) fn sparse_times_dense(s: &SparseMatrix, d: &DenseMatrix) -> Result<DenseMatrix> {
    check_len("sparse_times_dense inner dimension", s.ncols(), d.nrows())?;
    let w = d.ncols();
    let mut out = DenseMatrix::zeros(s.nrows(), w);
    for i in 0..s.nrows() {
        let (cols, vals) = s.row(i);
        let row = out.row_mut(i);
        for (&k, &v) in cols.iter().zip(vals) {
            crate::dense::axpy(v, d.row(k), row);
        }
    }
    Ok(out)
}

/// Exact inverse through a dense LU factorization.
#[derive(Debug, Clone)]
pub struct ExactPreconditioner {
    factor: LuFactor,
}

impl ExactPreconditioner {
    pub fn new(m: &DenseMatrix) -> Result<Self> {
        Ok(ExactPreconditioner { factor: lu(m)? })
    }

    /// Exact inverse of the saddle point matrix itself.
    pub fn for_system(sys: &SaddlePointSystem) -> Result<Self> {
        Self::new(&sys.to_dense()?)
    }
}

impl Preconditioner for ExactPreconditioner {
    fn order(&self) -> usize {
        self.factor.order()
    }

    fn apply_flat(&self, r: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.factor.solve(r).expect("length checked by caller"));
    }

    fn apply_transpose_flat(&self, r: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.factor.solve_transpose(r).expect("length checked by caller"));
    }

    fn label(&self) -> String {
        "exact".into()
    }
}
