use clap::{Args, Parser, Subcommand};
use pess_core::experiments::{DEFAULT_MAXIT, DEFAULT_TOL, ESTIMATE_LAMBDA3_COEF};
use pess_core::problems::DEFAULT_LAMBDA3_COEF;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "pess",
    version,
    about = "Shift-splitting preconditioners for 3x3 block saddle point systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one system with one preconditioner.
    Solve(SolveArgs),
    /// Solve with several preconditioners and tabulate the results.
    Compare(CompareArgs),
    /// Eigenvalues of the preconditioned operator and the bound checks.
    Spectrum(SpectrumArgs),
    /// Iteration counts (and optionally condition numbers) over a range of s.
    SweepS(SweepArgs),
    /// Solution change under noise added to B and C.
    Sensitivity(SensitivityArgs),
    /// Parameter estimates and the Frobenius objective.
    Params(ParamsArgs),
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Generate the Kronecker test problem with this grid size.
    #[arg(long, value_name = "L", conflicts_with_all = ["a", "b", "c"])]
    pub gen_l: Option<usize>,
    /// Scaling of G in the generated problem.
    #[arg(long, default_value = "unscaled", value_parser = ["unscaled", "normalized"])]
    pub scaling: String,
    /// Matrix Market file holding A.
    #[arg(long, requires_all = ["b", "c"])]
    pub a: Option<PathBuf>,
    /// Matrix Market file holding B.
    #[arg(long, requires_all = ["a", "c"])]
    pub b: Option<PathBuf>,
    /// Matrix Market file holding C.
    #[arg(long, requires_all = ["a", "b"])]
    pub c: Option<PathBuf>,
    /// Add 0.001·I to the loaded A.
    #[arg(long, requires = "a")]
    pub shift: bool,
}

#[derive(Debug, Args, Clone)]
pub struct PrecondArgs {
    /// Shift-splitting case preset: I or II.
    #[arg(long, default_value = "I")]
    pub case: String,
    /// Shift parameter s.
    #[arg(long, default_value_t = 12.0)]
    pub s: f64,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Coefficient k in Λ3 = k·I (Case I) or k·CCᵀ (Case II).
    #[arg(long, default_value_t = DEFAULT_LAMBDA3_COEF)]
    pub lambda3_coef: f64,
}

#[derive(Debug, Args, Clone)]
pub struct SolverArgs {
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAXIT)]
    pub maxit: usize,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Where to write the report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Report format: csv or json.
    #[arg(long, default_value = "csv")]
    pub format: String,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// none, bd, pess, lpess, ss, rss, egss or rpgss.
    #[arg(long, default_value = "pess")]
    pub precond: String,
    #[command(flatten)]
    pub precond_args: PrecondArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: ReportArgs,
    /// Also write the residual history, one value per line.
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Comma separated preconditioner names; may be empty.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub precond: Vec<String>,
    #[command(flatten)]
    pub precond_args: PrecondArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: ReportArgs,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value = "pess")]
    pub precond: String,
    #[command(flatten)]
    pub precond_args: PrecondArgs,
    /// Matrix defining θ̃ for the LPESS bounds.
    #[arg(long, default_value = "c-lambda2-ct", value_parser = ["c-lambda2-ct", "ct-lambda3-c"])]
    pub theta_tilde_form: String,
    /// Eigenvalue CSV (re, im, classification).
    #[arg(long)]
    pub eigs: Option<PathBuf>,
    /// Bound report JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value = "pess")]
    pub precond: String,
    #[command(flatten)]
    pub precond_args: PrecondArgs,
    /// Values of s as `start:stop:step` (inclusive) or a comma list.
    #[arg(long = "s-range", value_name = "RANGE")]
    pub s_range: String,
    /// Also compute κ(P⁻¹𝒜) for each s.
    #[arg(long)]
    pub kappa: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// CSV output (s, it, res, kappa).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Noise levels N_P in percent.
    #[arg(long, value_delimiter = ',', default_value = "5,10,15,20,25,30,35,40")]
    pub noise: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 12.0)]
    pub s: f64,
    #[arg(long, default_value_t = DEFAULT_LAMBDA3_COEF)]
    pub lambda3_coef: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// CSV output (np, error, it_perturbed).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ParamsArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Coefficient k in Λ3 = k·CCᵀ for the estimates.
    #[arg(long, default_value_t = ESTIMATE_LAMBDA3_COEF)]
    pub lambda3_coef: f64,
    /// Solve immediately with pess-II or lpess-II built from the estimates.
    #[arg(long, value_parser = ["pess-II", "lpess-II"])]
    pub preset: Option<String>,
    /// Case whose Λ triple enters φ(s).
    #[arg(long, default_value = "II")]
    pub case: String,
    /// Grid for φ(s) as `start:stop:step` or a comma list.
    #[arg(long)]
    pub phi_grid: Option<String>,
    #[command(flatten)]
    pub solver: SolverArgs,
}
