use super::{sparse_times_dense, GssConfig, Preconditioner, SpdFactor, SpdOperator};
use crate::dense::{axpy, cholesky, dot, norm2, CholeskyFactor, DenseMatrix, DENSE_SIZE_GUARD};
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;
use crate::system::SaddlePointSystem;

/// Largest `n` for which the Schur block `Ã` is formed densely.
pub const DENSE_ABLOCK_GUARD: usize = 3000;
const INNER_CG_TOL: f64 = 1e-12;

/// How the `Ã` solve of the application algorithm is carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BuildStrategy {
    /// Form `Ã` explicitly and factorize it.
    #[default]
    Dense,
    /// Conjugate gradients on `Ã`, applied matrix-free through the `X̂` factor.
    InnerCg,
}

#[derive(Debug, Clone)]
enum ABlock {
    Dense(CholeskyFactor),
    InnerCg { shifted_a: SparseMatrix },
}

/// Factorized generalized shift-splitting preconditioner.
#[derive(Debug, Clone)]
pub struct GssPreconditioner {
    config: GssConfig,
    b: SparseMatrix,
    c: SparseMatrix,
    lambda3: SpdFactor,
    xhat: CholeskyFactor,
    ablock: ABlock,
    xhat_asymmetry: f64,
    ablock_asymmetry: Option<f64>,
}

impl GssPreconditioner {
    pub fn build(sys: &SaddlePointSystem, config: &GssConfig, strategy: BuildStrategy) -> Result<Self> {
        config.validate(sys.dims())?;
        let (n, m, p) = sys.dims();
        let s = config.s;

        let lambda3 = config.lambda3.factor().map_err(|e| e.in_block("Λ3"))?;

        // X̂ = Λ2 + s² CᵀΛ3⁻¹C
        let ct_l3_c = match &lambda3 {
            SpdFactor::Diagonal(d) => {
                let inv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
                let scaled = SparseMatrix::from_diagonal(&inv).spmm(sys.c())?;
                sys.c().transpose().spmm(&scaled)?.to_dense()
            }
            SpdFactor::Cholesky(_) => {
                let z = lambda3.solve_matrix(&sys.c().to_dense())?;
                sparse_times_dense(&sys.c().transpose(), &z)?
            }
        };
        debug_assert_eq!(ct_l3_c.nrows(), m);
        let mut xhat = config.lambda2.to_dense(m).add_scaled(1.0, &ct_l3_c, s * s)?;
        let xhat_asymmetry = xhat.asymmetry();
        xhat.symmetrize();
        let xhat = cholesky(&xhat).map_err(|e| e.in_block("X̂"))?;

        let shifted_a = config.lambda1.to_sparse(n).add_scaled(1.0, sys.a(), config.t)?;
        let (ablock, ablock_asymmetry) = match strategy {
            BuildStrategy::Dense => {
                if n > DENSE_ABLOCK_GUARD || n + m + p > DENSE_SIZE_GUARD {
                    return Err(Error::SizeGuard {
                        size: n,
                        limit: DENSE_ABLOCK_GUARD,
                    });
                }
                // Ã = Λ1 + tA + s² Bᵀ X̂⁻¹ B
                let w = xhat.solve_matrix(&sys.b().to_dense())?;
                let bt_w = sparse_times_dense(&sys.b().transpose(), &w)?;
                let mut at = shifted_a.to_dense().add_scaled(1.0, &bt_w, s * s)?;
                let asym = at.asymmetry();
                at.symmetrize();
                let f = cholesky(&at).map_err(|e| e.in_block("Ã"))?;
                (ABlock::Dense(f), Some(asym))
            }
            BuildStrategy::InnerCg => (ABlock::InnerCg { shifted_a }, None),
        };

        Ok(GssPreconditioner {
            config: config.clone(),
            b: sys.b().clone(),
            c: sys.c().clone(),
            lambda3,
            xhat,
            ablock,
            xhat_asymmetry,
            ablock_asymmetry,
        })
    }

    pub fn config(&self) -> &GssConfig {
        &self.config
    }

    /// Relative asymmetry of `X̂` before it was symmetrized and factorized.
    pub fn xhat_asymmetry(&self) -> f64 {
        self.xhat_asymmetry
    }

    /// Relative asymmetry of the dense `Ã`, if it was formed.
    pub fn ablock_asymmetry(&self) -> Option<f64> {
        self.ablock_asymmetry
    }

    fn dims(&self) -> (usize, usize, usize) {
        (self.b.ncols(), self.b.nrows(), self.c.nrows())
    }

    /// Solves `P w = r` (sign = 1) or `Pᵀ w = r` (sign = −1). The transpose has
    /// the same block pattern with the coupling coefficient negated, and the
    /// Schur blocks depend on s² only, so the same factors serve both.
    fn solve(&self, r: &[f64], out: &mut [f64], sign: f64) {
        let (n, m, _) = self.dims();
        let s = sign * self.config.s;
        let (r1, rest) = r.split_at(n);
        let (r2, r3) = rest.split_at(m);
        let (w1, rest) = out.split_at_mut(n);
        let (w2, w3) = rest.split_at_mut(m);

        // v1 = X̂⁻¹(r2 + sCᵀΛ3⁻¹r3)
        let mut t3 = r3.to_vec();
        self.lambda3.solve_in_place(&mut t3);
        let mut v1 = vec![0.0; m];
        self.c.matvec_transpose_into(&t3, &mut v1);
        v1.iter_mut().zip(r2).for_each(|(v, r)| *v = r + s * *v);
        self.xhat.solve_in_place(&mut v1);

        // v = r1 − sBᵀv1, w1 = Ã⁻¹v
        self.b.matvec_transpose_into(&v1, w1);
        w1.iter_mut().zip(r1).for_each(|(w, r)| *w = r - s * *w);
        self.solve_ablock_in_place(w1);

        // w2 = v1 + X̂⁻¹(sBw1)
        self.b.matvec_into(w1, w2);
        w2.iter_mut().for_each(|v| *v *= s);
        self.xhat.solve_in_place(w2);
        w2.iter_mut().zip(&v1).for_each(|(w, v)| *w += v);

        // w3 = Λ3⁻¹(r3 − sCw2)
        self.c.matvec_into(w2, w3);
        w3.iter_mut().zip(r3).for_each(|(w, r)| *w = r - s * *w);
        self.lambda3.solve_in_place(w3);
    }

    fn solve_ablock_in_place(&self, v: &mut [f64]) {
        match &self.ablock {
            ABlock::Dense(f) => f.solve_in_place(v),
            ABlock::InnerCg { shifted_a } => {
                let rhs = v.to_vec();
                let x = self.inner_cg(shifted_a, &rhs);
                v.copy_from_slice(&x);
            }
        }
    }

    /// `Ãx = Λ1x + tAx + s²Bᵀ(X̂⁻¹(Bx))`.
    fn ablock_apply(&self, shifted_a: &SparseMatrix, x: &[f64], y: &mut [f64]) {
        let (_, m, _) = self.dims();
        let s2 = self.config.s * self.config.s;
        shifted_a.matvec_into(x, y);
        let mut bx = vec![0.0; m];
        self.b.matvec_into(x, &mut bx);
        self.xhat.solve_in_place(&mut bx);
        let mut tmp = vec![0.0; x.len()];
        self.b.matvec_transpose_into(&bx, &mut tmp);
        axpy(s2, &tmp, y);
    }

    fn inner_cg(&self, shifted_a: &SparseMatrix, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut x = vec![0.0; n];
        let bnorm = norm2(rhs);
        if bnorm == 0.0 {
            return x;
        }
        let mut r = rhs.to_vec();
        let mut p = r.clone();
        let mut ap = vec![0.0; n];
        let mut rr = dot(&r, &r);
        for _ in 0..10 * n.max(10) {
            self.ablock_apply(shifted_a, &p, &mut ap);
            let alpha = rr / dot(&p, &ap);
            axpy(alpha, &p, &mut x);
            axpy(-alpha, &ap, &mut r);
            let rr_new = dot(&r, &r);
            if rr_new.sqrt() <= INNER_CG_TOL * bnorm {
                break;
            }
            let beta = rr_new / rr;
            rr = rr_new;
            for (pi, ri) in p.iter_mut().zip(&r) {
                *pi = ri + beta * *pi;
            }
        }
        x
    }
}

impl Preconditioner for GssPreconditioner {
    fn order(&self) -> usize {
        let (n, m, p) = self.dims();
        n + m + p
    }

    fn apply_flat(&self, r: &[f64], out: &mut [f64]) {
        self.solve(r, out, 1.0);
    }

    fn apply_transpose_flat(&self, r: &[f64], out: &mut [f64]) {
        self.solve(r, out, -1.0);
    }

    fn label(&self) -> String {
        self.config.describe()
    }
}

/// `‖(P − Q) − 𝒜‖_F` with `Q` assembled independently from its block formula
/// when `t = s`, and defined as `P − 𝒜` otherwise.
pub fn splitting_residual(sys: &SaddlePointSystem, cfg: &GssConfig) -> Result<f64> {
    let size = sys.size();
    if size > DENSE_SIZE_GUARD {
        return Err(Error::SizeGuard {
            size,
            limit: DENSE_SIZE_GUARD,
        });
    }
    let p = cfg.dense_p(sys)?;
    let a = sys.to_dense()?;
    if cfg.t != cfg.s {
        let q = p.add_scaled(1.0, &a, -1.0)?;
        return Ok(p.add_scaled(1.0, &q, -1.0)?.add_scaled(1.0, &a, -1.0)?.frobenius_norm());
    }
    let q = dense_q(sys, cfg)?;
    Ok(p.add_scaled(1.0, &q, -1.0)?.add_scaled(1.0, &a, -1.0)?.frobenius_norm())
}

/// `Q = Σ − (1−s)𝒜` written out blockwise.
pub(crate) fn dense_q(sys: &SaddlePointSystem, cfg: &GssConfig) -> Result<DenseMatrix> {
    let (n, m, p) = sys.dims();
    let k = 1.0 - cfg.s;
    let a = sys.a().to_dense();
    let b = sys.b().to_dense();
    let c = sys.c().to_dense();
    let l1 = match &cfg.lambda1 {
        SpdOperator::Zero => DenseMatrix::zeros(n, n),
        other => other.to_dense(n),
    };
    let mut q = DenseMatrix::zeros(n + m + p, n + m + p);
    q.set_block(0, 0, &l1.add_scaled(1.0, &a, -k)?);
    q.set_block(0, n, &b.transpose().scale(-k));
    q.set_block(n, 0, &b.scale(k));
    q.set_block(n, n, &cfg.lambda2.to_dense(m));
    q.set_block(n, n + m, &c.transpose().scale(k));
    q.set_block(n + m, n, &c.scale(-k));
    q.set_block(n + m, n + m, &cfg.lambda3.to_dense(p));
    Ok(q)
}
