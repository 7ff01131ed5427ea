//! Spectra of preconditioned operators, the scalar extremes entering the
//! eigenvalue bounds, and condition numbers.

mod bounds;
mod report;

pub use bounds::{
    check_pess_real_interval, check_unit_disk, lpess_bounds, pess_nonreal_bounds, pess_real_interval, BoundReport, EigenVerdict, Violation,
    BOUND_SLACK, CLUSTER_TOL, DISK_SLACK, INTERVAL_SLACK,
};
pub use report::{write_eigenvalue_csv, SpectralReport};

use crate::dense::{cond2, eig_general, gen_eig_spd, lanczos_extremes, ComplexSpectrum, DenseMatrix, LanczosTarget, DENSE_SIZE_GUARD};
use crate::error::{check_len, Error, Result};
use crate::precond::{sparse_times_dense, BlockEliminationSolver, GssConfig, Preconditioner, SpdOperator};
use crate::system::SaddlePointSystem;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

/// Above this order condition numbers come from Lanczos instead of a dense
/// eigensolve of `MᵀM`.
pub const DENSE_COND_LIMIT: usize = 600;

fn desk_guard(size: usize) -> Result<()> {
    if size > DENSE_SIZE_GUARD {
        Err(Error::SizeGuard {
            size,
            limit: DENSE_SIZE_GUARD,
        })
    } else {
        Ok(())
    }
}

/// `P⁻¹𝒜` as a dense matrix, one preconditioner solve per column.
pub fn preconditioned_operator(sys: &SaddlePointSystem, precond: &dyn Preconditioner) -> Result<DenseMatrix> {
    desk_guard(sys.size())?;
    check_len("preconditioner order", sys.size(), precond.order())?;
    let a = sys.to_dense()?;
    let size = sys.size();
    let mut out = DenseMatrix::zeros(size, size);
    let mut col = vec![0.0; size];
    for j in 0..size {
        precond.apply_flat(&a.column(j), &mut col);
        out.set_column(j, &col);
    }
    Ok(out)
}

pub fn preconditioned_spectrum(sys: &SaddlePointSystem, precond: &dyn Preconditioner) -> Result<ComplexSpectrum> {
    eig_general(&preconditioned_operator(sys, precond)?)
}

/// Which matrix defines θ̃ in the LPESS bounds.
///
/// `CLambda2Ct` is the p×p matrix `Λ3⁻¹CΛ2⁻¹Cᵀ`. `CtLambda3C` is the m×m
/// matrix `Λ2⁻¹CᵀΛ3⁻¹C`; it has the same nonzero eigenvalues but adds zeros
/// when m > p, which collapses θ̃min. The p×p form reproduces the published
/// modulus window and is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaTildeForm {
    #[default]
    CLambda2Ct,
    CtLambda3C,
}

impl fmt::Display for ThetaTildeForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThetaTildeForm::CLambda2Ct => "c-lambda2-ct",
            ThetaTildeForm::CtLambda3C => "ct-lambda3-c",
        })
    }
}

impl FromStr for ThetaTildeForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c-lambda2-ct" => Ok(ThetaTildeForm::CLambda2Ct),
            "ct-lambda3-c" => Ok(ThetaTildeForm::CtLambda3C),
            other => Err(Error::InvalidArgument(format!("unknown theta-tilde form `{other}`"))),
        }
    }
}

/// Extreme eigenvalues feeding the bounds.
///
/// ξ and η need an SPD Λ1 and are `None` for LPESS-type configurations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarExtremes {
    /// `λ(Λ1⁻¹A)`
    pub xi: Option<(f64, f64)>,
    /// `λ(Λ2⁻¹BΛ1⁻¹Bᵀ)`
    pub eta: Option<(f64, f64)>,
    /// `λmax(Λ2⁻¹CᵀΛ3⁻¹C)`
    pub theta_max: f64,
    /// `λ(Λ2⁻¹BA⁻¹Bᵀ)`
    pub vartheta: (f64, f64),
    pub theta_tilde: (f64, f64),
    pub theta_tilde_form: ThetaTildeForm,
}

fn inapplicable(what: &str) -> Error {
    Error::InapplicableBound(format!("{what} needs an SPD Λ1"))
}

impl ScalarExtremes {
    pub fn xi_min(&self) -> Result<f64> {
        self.xi.map(|v| v.0).ok_or_else(|| inapplicable("ξmin"))
    }

    pub fn xi_max(&self) -> Result<f64> {
        self.xi.map(|v| v.1).ok_or_else(|| inapplicable("ξmax"))
    }

    pub fn eta_min(&self) -> Result<f64> {
        self.eta.map(|v| v.0).ok_or_else(|| inapplicable("ηmin"))
    }

    pub fn eta_max(&self) -> Result<f64> {
        self.eta.map(|v| v.1).ok_or_else(|| inapplicable("ηmax"))
    }

    pub fn vartheta_min(&self) -> f64 {
        self.vartheta.0
    }

    pub fn vartheta_max(&self) -> f64 {
        self.vartheta.1
    }

    pub fn theta_tilde_min(&self) -> f64 {
        self.theta_tilde.0
    }

    pub fn theta_tilde_max(&self) -> f64 {
        self.theta_tilde.1
    }
}

fn extremes(values: &[f64]) -> (f64, f64) {
    (values[0], values[values.len() - 1])
}

/// `Λ⁻¹M` for dense `M`, where Λ is one of the configuration blocks.
fn lambda_solve(op: &SpdOperator, m: &DenseMatrix, block: &'static str) -> Result<DenseMatrix> {
    op.factor().map_err(|e| e.in_block(block))?.solve_matrix(m)
}

/// `M Λ⁻¹ Mᵀ` for sparse `M`, symmetrized.
fn sandwich(mat: &crate::sparse::SparseMatrix, op: &SpdOperator, block: &'static str) -> Result<DenseMatrix> {
    let inner = lambda_solve(op, &mat.transpose().to_dense(), block)?;
    let mut out = sparse_times_dense(mat, &inner)?;
    out.symmetrize();
    Ok(out)
}

pub fn scalar_extremes(sys: &SaddlePointSystem, cfg: &GssConfig, form: ThetaTildeForm) -> Result<ScalarExtremes> {
    desk_guard(sys.size())?;
    cfg.validate(sys.dims())?;
    let (n, m, p) = sys.dims();
    let l2 = cfg.lambda2.to_dense(m);

    let (xi, eta) = if cfg.lambda1.is_zero() {
        (None, None)
    } else {
        let l1 = cfg.lambda1.to_dense(n);
        let xi = extremes(&gen_eig_spd(&sys.a().to_dense(), &l1)?);
        let eta = extremes(&gen_eig_spd(&sandwich(sys.b(), &cfg.lambda1, "Λ1")?, &l2)?);
        (Some(xi), Some(eta))
    };

    let ct_l3_c = sandwich(&sys.c().transpose(), &cfg.lambda3, "Λ3")?;
    let theta = gen_eig_spd(&ct_l3_c, &l2)?;
    let theta_max = theta[theta.len() - 1];

    let a_op = SpdOperator::Matrix(sys.a().clone());
    let q = sandwich(sys.b(), &a_op, "A")?;
    let vartheta = extremes(&gen_eig_spd(&q, &l2)?);

    let theta_tilde = match form {
        ThetaTildeForm::CLambda2Ct => {
            let c_l2_ct = sandwich(sys.c(), &cfg.lambda2, "Λ2")?;
            extremes(&gen_eig_spd(&c_l2_ct, &cfg.lambda3.to_dense(p))?)
        }
        ThetaTildeForm::CtLambda3C => extremes(&theta),
    };

    Ok(ScalarExtremes {
        xi,
        eta,
        theta_max,
        vartheta,
        theta_tilde,
        theta_tilde_form: form,
    })
}

const LANCZOS_STEPS: usize = 600;
const LANCZOS_TOL: f64 = 1e-11;

/// `κ₂(M)` for `M = 𝒜` or `M = P⁻¹𝒜`.
///
/// Small operators are densified and handed to [`cond2`]. Larger ones use
/// Lanczos on `MᵀM` for σmax. For σmin the preconditioned operator is
/// well conditioned and Lanczos on `MᵀM` suffices; the bare operator instead
/// runs Lanczos on `𝒜⁻¹𝒜⁻ᵀ` through a block-elimination direct solver.
pub fn condition_number(sys: &SaddlePointSystem, precond: Option<&dyn Preconditioner>) -> Result<f64> {
    let size = sys.size();
    if let Some(p) = precond {
        check_len("preconditioner order", size, p.order())?;
    }
    if size <= DENSE_COND_LIMIT {
        let m = match precond {
            Some(p) => preconditioned_operator(sys, p)?,
            None => sys.to_dense()?,
        };
        return cond2(&m);
    }

    let mut tmp = vec![0.0; size];
    let mut tmp2 = vec![0.0; size];
    let gram = |x: &[f64], y: &mut [f64]| match precond {
        Some(p) => {
            sys.apply_flat(x, &mut tmp);
            p.apply_flat(&tmp, &mut tmp2);
            p.apply_transpose_flat(&tmp2, &mut tmp);
            sys.apply_transpose_flat(&tmp, y);
        }
        None => {
            sys.apply_flat(x, &mut tmp);
            sys.apply_transpose_flat(&tmp, y);
        }
    };
    let target = if precond.is_some() {
        LanczosTarget::Both
    } else {
        LanczosTarget::Max
    };
    let top = lanczos_extremes(size, gram, LANCZOS_STEPS, LANCZOS_TOL, target);
    if !top.converged {
        return Err(Error::ConvergenceFailure(top.steps));
    }

    let sigma_min_sq = match precond {
        Some(_) => top.min,
        None => {
            let inv_max = inverse_gram_max(sys)?;
            1.0 / inv_max
        }
    };
    if !(sigma_min_sq > top.max * f64::EPSILON * size as f64) {
        return Err(Error::Singular);
    }
    Ok((top.max / sigma_min_sq).sqrt())
}

/// `λmax(𝒜⁻¹𝒜⁻ᵀ) = 1/σmin(𝒜)²`.
fn inverse_gram_max(sys: &SaddlePointSystem) -> Result<f64> {
    let solver = BlockEliminationSolver::build(sys)?;
    let mut tmp = vec![0.0; sys.size()];
    let op = |x: &[f64], y: &mut [f64]| {
        solver.apply_transpose_flat(x, &mut tmp);
        solver.apply_flat(&tmp, y);
    };
    let res = lanczos_extremes(sys.size(), op, LANCZOS_STEPS, LANCZOS_TOL, LanczosTarget::Max);
    if !res.converged {
        return Err(Error::ConvergenceFailure(res.steps));
    }
    Ok(res.max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precond::{make_config, ExactPreconditioner, GssSpec};
    use crate::sparse::SparseMatrix;

    fn small() -> SaddlePointSystem {
        let a = SparseMatrix::from_diagonal(&[1.0, 4.0]);
        let b = SparseMatrix::from_triplets(1, 2, &[(0, 0, 1.0), (0, 1, 1.0)]).unwrap();
        let c = SparseMatrix::identity(1);
        SaddlePointSystem::assemble(a, b, c).unwrap()
    }

    fn identity_cfg(sys: &SaddlePointSystem, s: f64) -> GssConfig {
        make_config(
            GssSpec::Pess {
                lambda1: SpdOperator::scaled_identity(sys.n(), 1.0),
                lambda2: SpdOperator::scaled_identity(sys.m(), 1.0),
                lambda3: SpdOperator::scaled_identity(sys.p(), 1.0),
                s,
            },
            sys.dims(),
        )
        .unwrap()
    }

    #[test]
    fn exact_preconditioner_spectrum_is_one() {
        let sys = small();
        let pc = ExactPreconditioner::for_system(&sys).unwrap();
        let sp = preconditioned_spectrum(&sys, &pc).unwrap();
        for z in &sp.eigenvalues {
            assert!((z - 1.0).norm() < 1e-9);
        }
        assert!((condition_number(&sys, Some(&pc)).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn diagonal_extremes() {
        let sys = small();
        let ex = scalar_extremes(&sys, &identity_cfg(&sys, 1.0), ThetaTildeForm::default()).unwrap();
        assert_eq!(ex.xi, Some((1.0, 4.0)));
        assert!((ex.eta_max().unwrap() - 2.0).abs() < 1e-14);
        assert!((ex.vartheta_max() - 1.25).abs() < 1e-14);
        assert!((ex.theta_max - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lpess_extremes_have_no_xi() {
        let sys = small();
        let mut cfg = identity_cfg(&sys, 1.0);
        cfg.lambda1 = SpdOperator::Zero;
        let ex = scalar_extremes(&sys, &cfg, ThetaTildeForm::default()).unwrap();
        assert!(matches!(ex.xi_max(), Err(Error::InapplicableBound(_))));
    }

    #[test]
    fn theta_tilde_forms_parse() {
        for f in [ThetaTildeForm::CLambda2Ct, ThetaTildeForm::CtLambda3C] {
            assert_eq!(f.to_string().parse::<ThetaTildeForm>().unwrap(), f);
        }
        assert!("other".parse::<ThetaTildeForm>().is_err());
    }
}
