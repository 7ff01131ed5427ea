//! The PESS stationary iteration `u ← P⁻¹(Qu + d)` and its convergence tests.

use crate::dense::{cholesky, eig_general, eig_symmetric, CholeskyFactor, DenseMatrix, DENSE_SIZE_GUARD};
use crate::error::{check_len, Error, Result};
use crate::precond::{BuildStrategy, GssConfig, GssPreconditioner, Preconditioner};
use crate::system::{BlockVector, SaddlePointSystem};
use num_complex::Complex64;
use serde::Serialize;

/// RES above this value counts as divergence.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone, Serialize)]
pub struct StationaryReport {
    pub solution: BlockVector,
    pub iterations: usize,
    pub converged: bool,
    /// RES of the starting vector followed by RES after each step.
    pub error_history: Vec<f64>,
}

fn require_pess(cfg: &GssConfig) -> Result<()> {
    if cfg.is_pess() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(
            "the stationary iteration needs a PESS configuration (Λ1 SPD, t = s)".into(),
        ))
    }
}

/// Runs `u_{k+1} = P⁻¹(Pu_k − 𝒜u_k + d)` until RES < tol or `maxit` steps.
///
/// `Q = P − 𝒜` is never assembled. Returns `Diverged` once RES exceeds
/// [`DIVERGENCE_THRESHOLD`].
pub fn pess_iterate(
    sys: &SaddlePointSystem,
    cfg: &GssConfig,
    u0: &BlockVector,
    d: &BlockVector,
    tol: f64,
    maxit: usize,
) -> Result<StationaryReport> {
    require_pess(cfg)?;
    cfg.validate(sys.dims())?;
    let size = sys.size();
    check_len("initial guess length", size, u0.len())?;
    check_len("rhs length", size, d.len())?;
    let (n, m, _) = sys.dims();
    let rhs = d.to_flat();
    let dn = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    if dn == 0.0 {
        return Err(Error::InvalidArgument("right-hand side is zero".into()));
    }
    let pc = GssPreconditioner::build(sys, cfg, BuildStrategy::Dense)?;

    let mut u = u0.to_flat();
    let mut au = vec![0.0; size];
    let mut pu = vec![0.0; size];
    let mut history = Vec::new();

    let residual = |u: &[f64], au: &mut [f64]| {
        sys.apply_flat(u, au);
        au.iter().zip(&rhs).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt() / dn
    };

    let mut res = residual(&u, &mut au);
    history.push(res);
    let mut iterations = 0;
    while res >= tol && iterations < maxit {
        cfg.apply_forward(sys, &u, &mut pu);
        for ((p, a), b) in pu.iter_mut().zip(&au).zip(&rhs) {
            *p += b - a;
        }
        pc.apply_flat(&pu, &mut u);
        iterations += 1;
        res = residual(&u, &mut au);
        history.push(res);
        if !res.is_finite() || res > DIVERGENCE_THRESHOLD {
            return Err(Error::Diverged {
                iteration: iterations,
                res,
            });
        }
    }

    Ok(StationaryReport {
        solution: BlockVector::from_flat(&u, n, m),
        iterations,
        converged: res < tol,
        error_history: history,
    })
}

/// Cholesky factor of `Σ = diag(Λ1, Λ2, Λ3)`, block diagonal by construction.
fn sigma_factor(sys: &SaddlePointSystem, cfg: &GssConfig) -> Result<CholeskyFactor> {
    let (n, m, p) = sys.dims();
    let mut sigma = DenseMatrix::zeros(n + m + p, n + m + p);
    sigma.set_block(0, 0, &cfg.lambda1.to_dense(n));
    sigma.set_block(n, n, &cfg.lambda2.to_dense(m));
    sigma.set_block(n + m, n + m, &cfg.lambda3.to_dense(p));
    cholesky(&sigma).map_err(|e| e.in_block("Σ"))
}

fn desk_guard(sys: &SaddlePointSystem) -> Result<()> {
    if sys.size() > DENSE_SIZE_GUARD {
        return Err(Error::SizeGuard {
            size: sys.size(),
            limit: DENSE_SIZE_GUARD,
        });
    }
    Ok(())
}

/// `L⁻¹ M L⁻ᵀ` where `LLᵀ = Σ`.
///
/// `L = Σ^{1/2}Uᵀ` for an orthogonal `U`, so this is orthogonally similar to
/// `Σ^{-1/2} M Σ^{-1/2}` and has the same eigenvalues.
fn scaled(l: &CholeskyFactor, m: &DenseMatrix) -> Result<DenseMatrix> {
    let y = l.forward_matrix(m)?;
    Ok(l.forward_matrix(&y.transpose())?.transpose())
}

#[derive(Debug, Clone, Serialize)]
pub struct PredicateReport {
    pub holds: bool,
    /// Smallest value of `(2s−1)|μ|² + 2Re μ` over the spectrum.
    pub min_lhs: f64,
    /// The `μ` attaining `min_lhs`.
    pub witness: Complex64,
    pub mu: Vec<Complex64>,
}

/// `(2s−1)|μ|² + 2Re μ`.
pub fn predicate_lhs(s: f64, mu: Complex64) -> f64 {
    (2.0 * s - 1.0) * mu.norm_sqr() + 2.0 * mu.re
}

/// Checks `(2s−1)|μ|² + 2Re μ > 0` for every eigenvalue μ of `Σ^{-1/2}𝒜Σ^{-1/2}`.
pub fn convergence_predicate(sys: &SaddlePointSystem, cfg: &GssConfig) -> Result<PredicateReport> {
    require_pess(cfg)?;
    desk_guard(sys)?;
    let l = sigma_factor(sys, cfg)?;
    let mu = eig_general(&scaled(&l, &sys.to_dense()?)?)?.eigenvalues;
    let (min_lhs, witness) =
        mu.iter().map(|&z| (predicate_lhs(cfg.s, z), z)).fold(
            (f64::INFINITY, Complex64::new(0.0, 0.0)),
            |acc, x| if x.0 < acc.0 { x } else { acc },
        );
    Ok(PredicateReport {
        holds: min_lhs > 0.0,
        min_lhs,
        witness,
        mu,
    })
}

/// `max{½(1 − λmin(Σ^{-1/2}(𝒜+𝒜ᵀ)Σ^{-1/2}) / ϑ(Σ^{-1/2}𝒜Σ^{-1/2})²), 0}`.
///
/// Any `s` above this value makes the stationary iteration converge. Because
/// `𝒜+𝒜ᵀ = diag(2A, 0, 0)` is singular whenever `m + p > 0`, the bound equals
/// ½ up to rounding for every admissible system.
pub fn sufficient_s_lower_bound(sys: &SaddlePointSystem, cfg: &GssConfig) -> Result<f64> {
    desk_guard(sys)?;
    let l = sigma_factor(sys, cfg)?;
    let a = sys.to_dense()?;
    let sym = a.add_scaled(1.0, &a.transpose(), 1.0)?;
    let mut ssym = scaled(&l, &sym)?;
    ssym.symmetrize();
    let lmin = eig_symmetric(&ssym)?[0];
    let rho = eig_general(&scaled(&l, &a)?)?.spectral_radius();
    Ok((0.5 * (1.0 - lmin / (rho * rho))).max(0.0))
}

/// ϑ(P⁻¹Q) from the explicit dense iteration matrix.
pub fn iteration_spectral_radius(sys: &SaddlePointSystem, cfg: &GssConfig) -> Result<f64> {
    desk_guard(sys)?;
    let pc = GssPreconditioner::build(sys, cfg, BuildStrategy::Dense)?;
    let q = crate::precond::dense_q(sys, cfg)?;
    let size = sys.size();
    let mut t = DenseMatrix::zeros(size, size);
    let mut col = vec![0.0; size];
    for j in 0..size {
        pc.apply_flat(&q.column(j), &mut col);
        t.set_column(j, &col);
    }
    Ok(eig_general(&t)?.spectral_radius())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precond::{make_config, GssSpec, SpdOperator};
    use crate::sparse::SparseMatrix;

    fn small() -> SaddlePointSystem {
        let a = SparseMatrix::tridiag(4, -1.0, 3.0, -1.0).unwrap();
        let b = SparseMatrix::from_triplets(2, 4, &[(0, 0, 1.0), (0, 1, 0.5), (1, 2, 1.0), (1, 3, -0.3)]).unwrap();
        let c = SparseMatrix::from_triplets(1, 2, &[(0, 0, 1.0), (0, 1, 0.4)]).unwrap();
        SaddlePointSystem::assemble(a, b, c).unwrap()
    }

    fn pess(sys: &SaddlePointSystem, s: f64) -> GssConfig {
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
    fn exact_start_is_converged_at_zero() {
        let sys = small();
        let d = sys.rhs_for_ones();
        let rep = pess_iterate(&sys, &pess(&sys, 1.0), &BlockVector::ones(4, 2, 1), &d, 1e-10, 10).unwrap();
        assert_eq!(rep.iterations, 0);
        assert!(rep.converged);
    }

    #[test]
    fn converges_for_s_one() {
        let sys = small();
        let d = sys.rhs_for_ones();
        let rep = pess_iterate(&sys, &pess(&sys, 1.0), &BlockVector::zeros(4, 2, 1), &d, 1e-10, 5000).unwrap();
        assert!(rep.converged);
        assert!((rep.solution.norm_inf() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn predicate_matches_spectral_radius() {
        let sys = small();
        for s in [0.05, 0.2, 0.5, 1.0, 3.0] {
            let cfg = pess(&sys, s);
            let pred = convergence_predicate(&sys, &cfg).unwrap();
            let rho = iteration_spectral_radius(&sys, &cfg).unwrap();
            assert_eq!(pred.holds, rho < 1.0, "s = {s}, rho = {rho}, lhs = {}", pred.min_lhs);
        }
    }

    #[test]
    fn lower_bound_is_one_half() {
        let sys = small();
        let b = sufficient_s_lower_bound(&sys, &pess(&sys, 1.0)).unwrap();
        assert!((b - 0.5).abs() < 1e-12);
    }

    #[test]
    fn lpess_is_rejected() {
        let sys = small();
        let mut cfg = pess(&sys, 1.0);
        cfg.lambda1 = SpdOperator::Zero;
        let d = sys.rhs_for_ones();
        assert!(pess_iterate(&sys, &cfg, &BlockVector::zeros(4, 2, 1), &d, 1e-8, 10).is_err());
    }
}
