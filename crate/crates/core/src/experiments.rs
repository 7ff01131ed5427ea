//! Named preconditioner choices and the single-solve driver shared by the
//! command line and the acceptance suite.

use crate::error::{Error, Result};
use crate::io::ReportRecord;
use crate::krylov::{gmres, SolveReport};
use crate::params::{estimate_params, ParamEstimate};
use crate::precond::{
    make_config, BdPreconditioner, BuildStrategy, GssConfig, GssKind, GssPreconditioner, GssSpec, Preconditioner, SpdOperator,
};
use crate::problems::{c_ct, case_preset, Case};
use crate::system::{BlockVector, SaddlePointSystem};
use std::time::Instant;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAXIT: usize = 7000;

/// Λ3 coefficient of the estimated-parameter presets.
pub const ESTIMATE_LAMBDA3_COEF: f64 = 1e-4;

/// Parameters of a splitting-family preconditioner. Unset values take the
/// per-case defaults listed on [`gss_spec`].
#[derive(Debug, Clone, PartialEq)]
pub struct GssChoice {
    pub kind: GssKind,
    pub case: Case,
    pub s: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub lambda3_coef: f64,
}

impl GssChoice {
    pub fn new(kind: GssKind, case: Case, s: f64) -> Self {
        GssChoice {
            kind,
            case,
            s,
            alpha: None,
            beta: None,
            gamma: None,
            lambda3_coef: crate::problems::DEFAULT_LAMBDA3_COEF,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PrecondChoice {
    None,
    Bd,
    Gss(GssChoice),
    /// PESS (or LPESS when `lpess`) with `Λ1 = A`, `Λ2 = β_est·I`,
    /// `Λ3 = k·CCᵀ` and `s = s_est`.
    Estimated {
        lpess: bool,
        lambda3_coef: f64,
    },
}

impl PrecondChoice {
    pub fn label(&self) -> String {
        match self {
            PrecondChoice::None => "GMRES".into(),
            PrecondChoice::Bd => "BD".into(),
            PrecondChoice::Gss(g) => match g.kind {
                GssKind::Ss | GssKind::Rss => g.kind.name().into(),
                k => format!("{}-{}", k.name(), g.case),
            },
            PrecondChoice::Estimated { lpess: false, .. } => "PESS-II-est".into(),
            PrecondChoice::Estimated { lpess: true, .. } => "LPESS-II-est".into(),
        }
    }
}

/// Builds the variant for a [`GssChoice`].
///
/// Defaults when a value is left unset:
/// - SS and RSS: α = 0.1 for Case I and 1 for Case II.
/// - EGSS Case I: α = 0.1, β = 1, γ = 0.001 with `P = Q = W = I`.
/// - EGSS Case II: α = 1, β = 1, γ = 0.001 with `P = A`, `Q = I`, `W = CCᵀ`.
/// - RPGSS: β and γ, Q and W as for EGSS.
pub fn gss_spec(sys: &SaddlePointSystem, g: &GssChoice) -> Result<GssSpec> {
    let (n, m, p) = sys.dims();
    let case_alpha = match g.case {
        Case::I => 0.1,
        Case::II => 1.0,
    };
    let alpha = g.alpha.unwrap_or(case_alpha);
    let beta = g.beta.unwrap_or(1.0);
    let gamma = g.gamma.unwrap_or(1e-3);
    let (pm, qm, wm) = match g.case {
        Case::I => (
            SpdOperator::scaled_identity(n, 1.0),
            SpdOperator::scaled_identity(m, 1.0),
            SpdOperator::scaled_identity(p, 1.0),
        ),
        Case::II => (
            SpdOperator::Matrix(sys.a().clone()),
            SpdOperator::scaled_identity(m, 1.0),
            SpdOperator::Matrix(c_ct(sys)?),
        ),
    };
    Ok(match g.kind {
        GssKind::Pess => case_preset(g.case, sys, g.lambda3_coef)?.pess(g.s),
        GssKind::Lpess => case_preset(g.case, sys, g.lambda3_coef)?.lpess(g.s),
        GssKind::Ss => GssSpec::Ss { alpha },
        GssKind::Rss => GssSpec::Rss { alpha },
        GssKind::Egss => GssSpec::Egss {
            alpha,
            beta,
            gamma,
            p: pm,
            q: qm,
            w: wm,
        },
        GssKind::Rpgss => GssSpec::Rpgss { beta, gamma, q: qm, w: wm },
    })
}

/// Λ3 and the balancing estimates for the estimated presets.
pub fn estimated_config(sys: &SaddlePointSystem, lpess: bool, lambda3_coef: f64) -> Result<(GssConfig, ParamEstimate)> {
    let lambda3 = SpdOperator::Matrix(c_ct(sys)?.scale(lambda3_coef));
    let est = estimate_params(sys, &lambda3)?;
    let lambda2 = est.lambda2(sys.m());
    let spec = if lpess {
        GssSpec::Lpess {
            lambda2,
            lambda3,
            s: est.s_est,
        }
    } else {
        GssSpec::Pess {
            lambda1: SpdOperator::Matrix(sys.a().clone()),
            lambda2,
            lambda3,
            s: est.s_est,
        }
    };
    Ok((make_config(spec, sys.dims())?, est))
}

/// The splitting configuration behind a choice, if it has one.
pub fn choice_config(sys: &SaddlePointSystem, choice: &PrecondChoice) -> Result<Option<GssConfig>> {
    match choice {
        PrecondChoice::None | PrecondChoice::Bd => Ok(None),
        PrecondChoice::Gss(g) => Ok(Some(make_config(gss_spec(sys, g)?, sys.dims())?)),
        PrecondChoice::Estimated { lpess, lambda3_coef } => Ok(Some(estimated_config(sys, *lpess, *lambda3_coef)?.0)),
    }
}

pub fn build_preconditioner(sys: &SaddlePointSystem, choice: &PrecondChoice) -> Result<Option<Box<dyn Preconditioner>>> {
    if let PrecondChoice::Bd = choice {
        return Ok(Some(Box::new(BdPreconditioner::build(sys)?)));
    }
    match choice_config(sys, choice)? {
        None => Ok(None),
        Some(cfg) => Ok(Some(Box::new(GssPreconditioner::build(sys, &cfg, BuildStrategy::Dense)?))),
    }
}

/// Result of [`run_solve`].
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: SolveReport,
    pub record: ReportRecord,
}

/// Builds the preconditioner and runs GMRES from zero on `𝒜u = 𝒜·1`.
pub fn run_solve(sys: &SaddlePointSystem, problem: &str, choice: &PrecondChoice, tol: f64, maxit: usize) -> Result<RunOutcome> {
    run_solve_rhs(sys, problem, choice, &sys.rhs_for_ones(), tol, maxit)
}

/// [`run_solve`] with a caller supplied right-hand side.
pub fn run_solve_rhs(
    sys: &SaddlePointSystem,
    problem: &str,
    choice: &PrecondChoice,
    d: &BlockVector,
    tol: f64,
    maxit: usize,
) -> Result<RunOutcome> {
    let start = Instant::now();
    let cfg = choice_config(sys, choice)?;
    let pc: Option<Box<dyn Preconditioner>> = match (&cfg, choice) {
        (_, PrecondChoice::Bd) => Some(Box::new(BdPreconditioner::build(sys)?)),
        (Some(c), _) => Some(Box::new(GssPreconditioner::build(sys, c, BuildStrategy::Dense)?)),
        (None, _) => None,
    };
    let report = gmres(sys, pc.as_deref(), d, tol, maxit)?;
    let wall = start.elapsed().as_secs_f64();

    let mut params = format!("tol={tol};maxit={maxit}");
    if let PrecondChoice::Gss(g) = choice {
        params.push_str(&format!(";case={}", g.case));
    }
    if let Some(c) = &cfg {
        params.push(';');
        params.push_str(&c.describe());
    }
    let record = ReportRecord {
        process: choice.label(),
        problem: problem.into(),
        size: sys.size(),
        it: report.iterations,
        res: report.final_res,
        wall_seconds: wall,
        params,
    };
    Ok(RunOutcome { report, record })
}

/// Parses labels such as `pess`, `lpess`, `ss`, `bd` or `none`.
pub fn parse_choice(name: &str, case: Case, s: f64) -> Result<PrecondChoice> {
    match name.to_ascii_lowercase().as_str() {
        "none" | "gmres" => Ok(PrecondChoice::None),
        "bd" => Ok(PrecondChoice::Bd),
        other => match other.parse::<GssKind>() {
            Ok(kind) => Ok(PrecondChoice::Gss(GssChoice::new(kind, case, s))),
            Err(_) => Err(Error::InvalidArgument(format!("unknown preconditioner `{name}`"))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::example1;

    #[test]
    fn labels() {
        assert_eq!(parse_choice("none", Case::I, 1.0).unwrap().label(), "GMRES");
        assert_eq!(parse_choice("PESS", Case::II, 1.0).unwrap().label(), "PESS-II");
        assert_eq!(parse_choice("ss", Case::II, 1.0).unwrap().label(), "SS");
        assert!(parse_choice("ilu", Case::I, 1.0).is_err());
    }

    #[test]
    fn every_choice_solves_small_problem() {
        let sys = example1(3).unwrap();
        let mut choices = vec![PrecondChoice::None, PrecondChoice::Bd];
        for case in [Case::I, Case::II] {
            for kind in GssKind::ALL {
                choices.push(PrecondChoice::Gss(GssChoice::new(kind, case, 2.0)));
            }
        }
        choices.push(PrecondChoice::Estimated {
            lpess: false,
            lambda3_coef: ESTIMATE_LAMBDA3_COEF,
        });
        for c in &choices {
            let out = run_solve(&sys, "ex1-l3", c, 1e-8, 200).unwrap();
            assert!(out.report.converged, "{}", c.label());
            assert_eq!(out.record.it, out.report.iterations);
        }
    }
}
