//! The three-by-three block saddle point system
//!
//! ```text
//!   [ A   Bᵀ   0 ] [x]   [f]
//!   [-B   0   -Cᵀ] [y] = [g]
//!   [ 0   C    0 ] [z]   [h]
//! ```
//!
//! with `A` SPD (n×n), `B` (m×n) and `C` (p×m) of full row rank.

use crate::dense::{cholesky, eig_symmetric, DenseMatrix, DENSE_SIZE_GUARD};
use crate::error::{check_len, Error, Result};
use crate::sparse::SparseMatrix;
use serde::{Deserialize, Serialize};

const SYMMETRY_TOL: f64 = 1e-12;
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SaddlePointSystem {
    a: SparseMatrix,
    b: SparseMatrix,
    c: SparseMatrix,
}

/// A vector split conformally with the system blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockVector {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl BlockVector {
    pub fn new(x: Vec<f64>, y: Vec<f64>, z: Vec<f64>) -> Self {
        BlockVector { x, y, z }
    }

    pub fn zeros(n: usize, m: usize, p: usize) -> Self {
        BlockVector::new(vec![0.0; n], vec![0.0; m], vec![0.0; p])
    }

    pub fn ones(n: usize, m: usize, p: usize) -> Self {
        BlockVector::new(vec![1.0; n], vec![1.0; m], vec![1.0; p])
    }

    pub fn len(&self) -> usize {
        self.x.len() + self.y.len() + self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(&self.x);
        v.extend_from_slice(&self.y);
        v.extend_from_slice(&self.z);
        v
    }

    pub fn from_flat(flat: &[f64], n: usize, m: usize) -> Self {
        BlockVector::new(flat[..n].to_vec(), flat[n..n + m].to_vec(), flat[n + m..].to_vec())
    }

    pub fn norm2(&self) -> f64 {
        self.x.iter().chain(&self.y).chain(&self.z).map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.x.iter().chain(&self.y).chain(&self.z).fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Validation depth for [`SaddlePointSystem::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationLevel {
    Shape,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub shape_ok: bool,
    pub a_symmetric: bool,
    /// `None` when the check was not run (shape level or size guard).
    pub a_spd: Option<bool>,
    pub b_full_row_rank: Option<bool>,
    pub c_full_row_rank: Option<bool>,
    /// SPD `A` with full-row-rank `B` and `C` implies a nonsingular system.
    pub nonsingular: Option<bool>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.shape_ok
            && self.a_symmetric
            && self.a_spd != Some(false)
            && self.b_full_row_rank != Some(false)
            && self.c_full_row_rank != Some(false)
    }
}

impl SaddlePointSystem {
    /// Records the blocks after checking shapes and the symmetry of `A`.
    pub fn assemble(a: SparseMatrix, b: SparseMatrix, c: SparseMatrix) -> Result<Self> {
        check_len("A columns", a.nrows(), a.ncols())?;
        check_len("B columns", a.nrows(), b.ncols())?;
        check_len("C columns", b.nrows(), c.ncols())?;
        let asym = a.asymmetry();
        if asym > SYMMETRY_TOL {
            return Err(Error::Asymmetric(asym));
        }
        Ok(SaddlePointSystem { a, b, c })
    }

    pub fn a(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn b(&self) -> &SparseMatrix {
        &self.b
    }

    pub fn c(&self) -> &SparseMatrix {
        &self.c
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.nrows()
    }

    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n(), self.m(), self.p())
    }

    pub fn size(&self) -> usize {
        self.n() + self.m() + self.p()
    }

    fn check_vector(&self, u: &BlockVector) -> Result<()> {
        check_len("x block", self.n(), u.x.len())?;
        check_len("y block", self.m(), u.y.len())?;
        check_len("z block", self.p(), u.z.len())
    }

    /// `(Ax + Bᵀy, −Bx − Cᵀz, Cy)`.
    pub fn operator_apply(&self, u: &BlockVector) -> Result<BlockVector> {
        self.check_vector(u)?;
        let mut out = vec![0.0; self.size()];
        self.apply_flat(&u.to_flat(), &mut out);
        Ok(BlockVector::from_flat(&out, self.n(), self.m()))
    }

    /// Flat-vector form of [`operator_apply`](Self::operator_apply).
    pub fn apply_flat(&self, u: &[f64], out: &mut [f64]) {
        self.apply_signed(u, out, 1.0);
    }

    /// `𝒜ᵀu`, i.e. the same block pattern with the off-diagonal signs flipped.
    pub fn apply_transpose_flat(&self, u: &[f64], out: &mut [f64]) {
        self.apply_signed(u, out, -1.0);
    }

    fn apply_signed(&self, u: &[f64], out: &mut [f64], sign: f64) {
        let (n, m, _) = self.dims();
        let (x, rest) = u.split_at(n);
        let (y, z) = rest.split_at(m);
        let (ox, rest) = out.split_at_mut(n);
        let (oy, oz) = rest.split_at_mut(m);
        let mut tmp_n = vec![0.0; n];
        let mut tmp_m = vec![0.0; m];

        self.a.matvec_into(x, ox);
        self.b.matvec_transpose_into(y, &mut tmp_n);
        for (o, t) in ox.iter_mut().zip(&tmp_n) {
            *o += sign * t;
        }

        self.b.matvec_into(x, oy);
        self.c.matvec_transpose_into(z, &mut tmp_m);
        for (o, t) in oy.iter_mut().zip(&tmp_m) {
            *o = -sign * (*o + t);
        }

        self.c.matvec_into(y, oz);
        if sign < 0.0 {
            oz.iter_mut().for_each(|v| *v = -*v);
        }
    }

    /// `d = 𝒜·1`, so that the exact solution is the all-ones vector.
    pub fn rhs_for_ones(&self) -> BlockVector {
        let (n, m, p) = self.dims();
        self.operator_apply(&BlockVector::ones(n, m, p)).expect("conformal by construction")
    }

    /// The monolithic matrix as CSR.
    pub fn to_sparse(&self) -> SparseMatrix {
        let (n, m, _) = self.dims();
        let size = self.size();
        let mut t = Vec::with_capacity(self.a.nnz() + 2 * self.b.nnz() + 2 * self.c.nnz());
        self.a.push_triplets(&mut t, 0, 0, 1.0);
        self.b.transpose().push_triplets(&mut t, 0, n, 1.0);
        self.b.push_triplets(&mut t, n, 0, -1.0);
        self.c.transpose().push_triplets(&mut t, n, n + m, -1.0);
        self.c.push_triplets(&mut t, n + m, n, 1.0);
        SparseMatrix::from_triplets(size, size, &t).expect("indices in range")
    }

    pub fn to_dense(&self) -> Result<DenseMatrix> {
        if self.size() > DENSE_SIZE_GUARD {
            return Err(Error::SizeGuard {
                size: self.size(),
                limit: DENSE_SIZE_GUARD,
            });
        }
        Ok(self.to_sparse().to_dense())
    }

    pub fn validate(&self, level: ValidationLevel) -> ValidationReport {
        let shape_ok = self.a.nrows() == self.a.ncols() && self.b.ncols() == self.n() && self.c.ncols() == self.m();
        let a_symmetric = self.a.asymmetry() <= SYMMETRY_TOL;
        let mut report = ValidationReport {
            shape_ok,
            a_symmetric,
            a_spd: None,
            b_full_row_rank: None,
            c_full_row_rank: None,
            nonsingular: None,
        };
        if level == ValidationLevel::Shape || !shape_ok || self.size() > DENSE_SIZE_GUARD {
            return report;
        }
        let spd = a_symmetric && cholesky(&self.a.to_dense()).is_ok();
        let b_rank = full_row_rank(&self.b);
        let c_rank = full_row_rank(&self.c);
        report.a_spd = Some(spd);
        report.b_full_row_rank = Some(b_rank);
        report.c_full_row_rank = Some(c_rank);
        report.nonsingular = Some(spd && b_rank && c_rank);
        report
    }
}

/// All singular values above `RANK_TOL` times the largest, from the eigenvalues of `MMᵀ`.
fn full_row_rank(m: &SparseMatrix) -> bool {
    if m.nrows() == 0 {
        return true;
    }
    if m.nrows() > m.ncols() {
        return false;
    }
    let gram = match m.spmm(&m.transpose()) {
        Ok(g) => g.to_dense(),
        Err(_) => return false,
    };
    let ev = match eig_symmetric(&gram) {
        Ok(ev) => ev,
        Err(_) => return false,
    };
    let largest = ev[ev.len() - 1];
    if largest <= 0.0 {
        return false;
    }
    let smallest = ev[0].max(0.0);
    smallest.sqrt() > RANK_TOL * largest.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> SaddlePointSystem {
        SaddlePointSystem::assemble(
            SparseMatrix::identity(2),
            SparseMatrix::from_triplets(1, 2, &[(0, 0, 1.0)]).unwrap(),
            SparseMatrix::identity(1),
        )
        .unwrap()
    }

    #[test]
    fn minimal_operator() {
        let sys = minimal();
        let u = BlockVector::new(vec![1.0, 0.0], vec![1.0], vec![1.0]);
        let out = sys.operator_apply(&u).unwrap();
        assert_eq!(out, BlockVector::new(vec![2.0, 0.0], vec![-2.0], vec![1.0]));
        assert_eq!(sys.rhs_for_ones(), BlockVector::new(vec![2.0, 1.0], vec![-2.0], vec![1.0]));
        let zero = sys.operator_apply(&BlockVector::zeros(2, 1, 1)).unwrap();
        assert_eq!(zero.norm2(), 0.0);
    }

    #[test]
    fn minimal_dense() {
        let d = minimal().to_dense().unwrap();
        assert_eq!(
            d.values(),
            &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, -1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0]
        );
    }

    #[test]
    fn transpose_action_matches_dense() {
        let sys = minimal();
        let d = sys.to_dense().unwrap();
        let u = [0.3, -1.2, 2.0, 0.7];
        let mut out = [0.0; 4];
        sys.apply_transpose_flat(&u, &mut out);
        assert_eq!(out.to_vec(), d.matvec_transpose(&u).unwrap());
    }

    #[test]
    fn shape_and_symmetry_errors() {
        let bad_b = SparseMatrix::zeros(1, 3);
        assert!(SaddlePointSystem::assemble(SparseMatrix::identity(2), bad_b, SparseMatrix::identity(1)).is_err());
        let asym = SparseMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        assert!(matches!(
            SaddlePointSystem::assemble(asym, SparseMatrix::zeros(1, 2), SparseMatrix::identity(1)),
            Err(Error::Asymmetric(_))
        ));
    }

    #[test]
    fn validation_verdicts() {
        assert!(minimal().validate(ValidationLevel::Full).passed());
        let indefinite = SaddlePointSystem::assemble(
            SparseMatrix::from_diagonal(&[1.0, -1.0]),
            SparseMatrix::from_triplets(1, 2, &[(0, 0, 1.0)]).unwrap(),
            SparseMatrix::identity(1),
        )
        .unwrap();
        let r = indefinite.validate(ValidationLevel::Full);
        assert_eq!(r.a_spd, Some(false));
        assert_eq!(r.nonsingular, Some(false));
        let zero_row = SaddlePointSystem::assemble(
            SparseMatrix::identity(2),
            SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0)]).unwrap(),
            SparseMatrix::from_triplets(1, 2, &[(0, 0, 1.0)]).unwrap(),
        )
        .unwrap();
        assert_eq!(zero_row.validate(ValidationLevel::Full).b_full_row_rank, Some(false));
        assert_eq!(zero_row.validate(ValidationLevel::Shape).b_full_row_rank, None);
    }
}
