//! Shift selection: the Frobenius objective φ(s) and the balancing estimates.

use crate::error::{Error, Result};
use crate::precond::{dense_q, GssConfig, SpdOperator};
use crate::sparse::power_iteration_psd;
use crate::system::SaddlePointSystem;
use serde::Serialize;

pub const NORM_TOL: f64 = 1e-10;
pub const NORM_MAXIT: usize = 100_000;

/// The quantities φ depends on, computed once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiTerms {
    /// `‖Λ1‖² + ‖Λ2‖² + ‖Λ3‖²`
    pub lambda_sq: f64,
    pub trace_l1_a: f64,
    pub a_sq: f64,
    pub b_sq: f64,
    pub c_sq: f64,
}

impl PhiTerms {
    pub fn new(sys: &SaddlePointSystem, cfg: &GssConfig) -> Self {
        let sq = |x: f64| x * x;
        PhiTerms {
            lambda_sq: sq(cfg.lambda1.frobenius_norm()) + sq(cfg.lambda2.frobenius_norm()) + sq(cfg.lambda3.frobenius_norm()),
            trace_l1_a: cfg.lambda1.trace_product(sys.a()),
            a_sq: sq(sys.a().frobenius_norm()),
            b_sq: sq(sys.b().frobenius_norm()),
            c_sq: sq(sys.c().frobenius_norm()),
        }
    }

    /// `Σ‖Λi‖² + (s−1)²‖A‖² + 2(s−1)tr(Λ1A) + 2(s−1)²(‖B‖² + ‖C‖²)`
    pub fn phi(&self, s: f64) -> f64 {
        let k = s - 1.0;
        self.lambda_sq + k * k * self.a_sq + 2.0 * k * self.trace_l1_a + 2.0 * k * k * (self.b_sq + self.c_sq)
    }

    /// `1 − tr(Λ1A)/(‖A‖² + 2‖B‖² + 2‖C‖²)`
    pub fn minimizer(&self) -> f64 {
        1.0 - self.trace_l1_a / (self.a_sq + 2.0 * self.b_sq + 2.0 * self.c_sq)
    }
}

/// `‖Q‖²_F` for the splitting `Q = P − 𝒜` with shift `s` (and `t = s`),
/// from the closed-form expansion. The `s` stored in `cfg` is ignored.
pub fn phi(sys: &SaddlePointSystem, cfg: &GssConfig, s: f64) -> f64 {
    PhiTerms::new(sys, cfg).phi(s)
}

pub fn phi_minimizer(sys: &SaddlePointSystem, cfg: &GssConfig) -> f64 {
    PhiTerms::new(sys, cfg).minimizer()
}

/// `‖Q‖²_F` from the assembled dense Q, as an oracle for [`phi`].
pub fn phi_direct(sys: &SaddlePointSystem, cfg: &GssConfig, s: f64) -> Result<f64> {
    let mut c = cfg.clone();
    c.s = s;
    c.t = s;
    let q = dense_q(sys, &c)?;
    Ok(q.frobenius_norm().powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamNorms {
    pub a: f64,
    pub b: f64,
    pub ct_lambda3_c: f64,
    /// `‖Λ2‖₂`, equal to β_est since Λ2 = β_est·I.
    pub lambda2: f64,
    /// Whether every power iteration met [`NORM_TOL`].
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamEstimate {
    pub s_est: f64,
    pub beta_est: f64,
    pub norms: ParamNorms,
}

impl ParamEstimate {
    /// `Λ2 = β_est·I`
    pub fn lambda2(&self, m: usize) -> SpdOperator {
        SpdOperator::scaled_identity(m, self.beta_est)
    }
}

/// Balancing estimates `β_est = ‖B‖⁴/(4‖CᵀΛ3⁻¹C‖‖A‖²)` and
/// `s_est = √(β_est/‖CᵀΛ3⁻¹C‖)`, all norms spectral and obtained by power
/// iteration.
pub fn estimate_params(sys: &SaddlePointSystem, lambda3: &SpdOperator) -> Result<ParamEstimate> {
    let (_, m, p) = sys.dims();
    if lambda3.order() != Some(p) {
        return Err(Error::InvalidArgument(format!("Λ3 must be an SPD operator of order {p}")));
    }
    let l3 = lambda3.factor().map_err(|e| e.in_block("Λ3"))?;
    let na = sys.a().norm2_estimate(NORM_TOL, NORM_MAXIT);
    let nb = sys.b().norm2_estimate(NORM_TOL, NORM_MAXIT);
    let mut tmp = vec![0.0; p];
    let nx = power_iteration_psd(
        m,
        |x, y| {
            sys.c().matvec_into(x, &mut tmp);
            l3.solve_in_place(&mut tmp);
            sys.c().matvec_transpose_into(&tmp, y);
        },
        NORM_TOL,
        NORM_MAXIT,
    );
    for (name, v) in [("A", na.value), ("B", nb.value), ("CᵀΛ3⁻¹C", nx.value)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("‖{name}‖₂ is zero or not finite")));
        }
    }
    let beta = nb.value.powi(4) / (4.0 * nx.value * na.value * na.value);
    let s = (beta / nx.value).sqrt();
    Ok(ParamEstimate {
        s_est: s,
        beta_est: beta,
        norms: ParamNorms {
            a: na.value,
            b: nb.value,
            ct_lambda3_c: nx.value,
            lambda2: beta,
            converged: na.converged && nb.converged && nx.converged,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precond::make_config;
    use crate::problems::{case_preset, example1, Case};
    use crate::sparse::SparseMatrix;

    #[test]
    fn phi_at_one_is_lambda_norms() {
        let sys = example1(2).unwrap();
        let t = case_preset(Case::I, &sys, 1e-3).unwrap();
        let cfg = make_config(t.pess(3.0), sys.dims()).unwrap();
        let expected = 8.0 + 4.0 + 4.0 * 1e-6;
        assert!((phi(&sys, &cfg, 1.0) - expected).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_dense() {
        let sys = example1(2).unwrap();
        for case in [Case::I, Case::II] {
            let t = case_preset(case, &sys, 1e-3).unwrap();
            let cfg = make_config(t.pess(1.0), sys.dims()).unwrap();
            for s in [0.1, 0.7, 2.5, 12.0] {
                let a = phi(&sys, &cfg, s);
                let b = phi_direct(&sys, &cfg, s).unwrap();
                assert!((a - b).abs() <= 1e-10 * b, "{case}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn hand_estimate() {
        // ‖A‖ = 1, ‖B‖ = √2, C = I, Λ3 = I
        let a = SparseMatrix::identity(2);
        let b = SparseMatrix::from_triplets(1, 2, &[(0, 0, 1.0), (0, 1, 1.0)]).unwrap();
        let sys = SaddlePointSystem::assemble(a, b, SparseMatrix::identity(1)).unwrap();
        let est = estimate_params(&sys, &SpdOperator::scaled_identity(1, 1.0)).unwrap();
        assert!((est.beta_est - 1.0).abs() < 1e-9);
        assert!((est.s_est - 1.0).abs() < 1e-9);
    }
}
