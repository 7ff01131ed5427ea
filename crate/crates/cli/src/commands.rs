use crate::args::*;
use anyhow::{anyhow, bail, Context, Result};
use pess_core::experiments::{
    build_preconditioner, choice_config, estimated_config, parse_choice, run_solve, run_solve_rhs, GssChoice, PrecondChoice,
};
use pess_core::io::{format_res, write_report, ReportFormat, ReportRecord};
use pess_core::params::PhiTerms;
use pess_core::precond::GssKind;
use pess_core::problems::{case_preset, example1_with, load_external, perturb, Case, Example1Scaling, NoiseSpec};
use pess_core::spectral::{
    check_pess_real_interval, check_unit_disk, condition_number, lpess_bounds, pess_nonreal_bounds, preconditioned_spectrum,
    scalar_extremes, write_eigenvalue_csv, SpectralReport, ThetaTildeForm, BOUND_SLACK, CLUSTER_TOL, INTERVAL_SLACK,
};
use pess_core::{dense::eig_general, SaddlePointSystem};
use std::io::Write;
use std::path::Path;

/// What the process should report through its exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Done,
    NotConverged,
}

fn load_problem(p: &ProblemArgs) -> Result<(SaddlePointSystem, String)> {
    match (p.gen_l, &p.a, &p.b, &p.c) {
        (Some(l), None, None, None) => {
            let scaling: Example1Scaling = p.scaling.parse()?;
            let sys = example1_with(l, scaling)?;
            Ok((sys, format!("example1-l{l}-{scaling}")))
        }
        (None, Some(a), Some(b), Some(c)) => {
            let sys = load_external(a, b, c, p.shift).with_context(|| "loading Matrix Market blocks")?;
            let stem = a.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((sys, format!("external-{stem}")))
        }
        _ => bail!("give exactly one problem source: --gen-l L, or --a/--b/--c files"),
    }
}

fn choice(name: &str, pa: &PrecondArgs) -> Result<PrecondChoice> {
    let case: Case = pa.case.parse()?;
    let mut c = parse_choice(name, case, pa.s)?;
    if let PrecondChoice::Gss(g) = &mut c {
        g.alpha = pa.alpha;
        g.beta = pa.beta;
        g.gamma = pa.gamma;
        g.lambda3_coef = pa.lambda3_coef;
    }
    Ok(c)
}

fn emit_records(records: &[ReportRecord], out: &ReportArgs) -> Result<()> {
    if let Some(path) = &out.report {
        let format: ReportFormat = out.format.parse()?;
        write_report(records, format, path).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn print_record(r: &ReportRecord, converged: bool) {
    println!(
        "{:<14} {:<28} size={:<6} IT={:<5} RES={} {}",
        r.process,
        r.problem,
        r.size,
        r.it,
        format_res(r.res),
        if converged { "converged" } else { "not converged" }
    );
}

pub fn solve(args: &SolveArgs) -> Result<Status> {
    let (sys, problem) = load_problem(&args.problem)?;
    let c = choice(&args.precond, &args.precond_args)?;
    let out = run_solve(&sys, &problem, &c, args.solver.tol, args.solver.maxit)?;
    print_record(&out.record, out.report.converged);
    emit_records(std::slice::from_ref(&out.record), &args.output)?;
    if let Some(path) = &args.history {
        let mut f = std::fs::File::create(path)?;
        for r in &out.report.res_history {
            writeln!(f, "{r:.17e}")?;
        }
    }
    Ok(if out.report.converged { Status::Done } else { Status::NotConverged })
}

pub fn compare(args: &CompareArgs) -> Result<Status> {
    let (sys, problem) = load_problem(&args.problem)?;
    let choices = args
        .precond
        .iter()
        .filter(|n| !n.trim().is_empty())
        .map(|n| choice(n.trim(), &args.precond_args))
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::new();
    for c in &choices {
        match run_solve(&sys, &problem, c, args.solver.tol, args.solver.maxit) {
            Ok(out) => {
                print_record(&out.record, out.report.converged);
                records.push(out.record);
            }
            Err(e) => eprintln!("{}: {e}", c.label()),
        }
    }
    emit_records(&records, &args.output)?;
    if records.len() != choices.len() {
        bail!("{} of {} runs failed", choices.len() - records.len(), choices.len());
    }
    Ok(Status::Done)
}

pub fn spectrum(args: &SpectrumArgs) -> Result<Status> {
    let (sys, problem) = load_problem(&args.problem)?;
    let c = choice(&args.precond, &args.precond_args)?;
    let form: ThetaTildeForm = args.theta_tilde_form.parse()?;

    let spectrum = match build_preconditioner(&sys, &c)? {
        Some(pc) => preconditioned_spectrum(&sys, pc.as_ref())?,
        None => eig_general(&sys.to_dense()?)?,
    };
    let cfg = choice_config(&sys, &c)?;
    let s = cfg.as_ref().map_or(f64::NAN, |c| c.s);
    let mut report = SpectralReport::new(c.label(), s, &spectrum);
    report.metadata.insert("problem".into(), problem);
    report.metadata.insert("theta_tilde_form".into(), form.to_string());

    if let Some(cfg) = &cfg {
        let ex = scalar_extremes(&sys, cfg, form)?;
        report.bounds.push(check_unit_disk(&spectrum, cfg.s));
        if cfg.is_pess() {
            report.bounds.push(check_pess_real_interval(&spectrum, &ex, cfg.s, INTERVAL_SLACK)?);
            report.bounds.push(pess_nonreal_bounds(&spectrum, &ex, cfg.s, BOUND_SLACK)?);
        } else if cfg.is_lpess() {
            report
                .bounds
                .push(lpess_bounds(&spectrum, &ex, cfg.s, sys.n(), BOUND_SLACK, CLUSTER_TOL)?);
        }
        report.extremes = Some(ex);
    }

    println!(
        "{}: {} eigenvalues, {} real, {} non-real, spectral radius {:.6}",
        report.label, report.size, report.real_count, report.nonreal_count, report.spectral_radius
    );
    for b in &report.bounds {
        let values: Vec<String> = b.bounds.iter().map(|(k, v)| format!("{k}={v:.6e}")).collect();
        println!(
            "  {:<20} {} ({} checked, {} violations) {}",
            b.theorem,
            if b.holds() { "holds" } else { "FAILS" },
            b.verdicts.len(),
            b.violations.len(),
            values.join(" ")
        );
    }
    if let Some(path) = &args.eigs {
        write_eigenvalue_csv(&spectrum, path)?;
    }
    if let Some(path) = &args.json {
        report.write_json(path)?;
    }
    Ok(Status::Done)
}

/// `start:stop:step` (inclusive, with a little slack for rounding) or a
/// comma separated list.
pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    if text.contains(':') {
        let parts: Vec<f64> = text
            .split(':')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| anyhow!("bad range `{text}`: {e}"))?;
        let [start, stop, step] = parts[..] else {
            bail!("a range needs start:stop:step, got `{text}`");
        };
        if step.is_nan() || step <= 0.0 {
            bail!("range step must be positive");
        }
        let count = ((stop - start) / step + 1e-9).floor();
        if count < 0.0 {
            return Ok(Vec::new());
        }
        Ok((0..=count as usize).map(|k| start + k as f64 * step).collect())
    } else {
        text.split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse::<f64>().map_err(|e| anyhow!("bad value `{t}`: {e}")))
            .collect()
    }
}

pub fn sweep_s(args: &SweepArgs) -> Result<Status> {
    let values = parse_range(&args.s_range)?;
    if values.is_empty() {
        bail!("the s range is empty");
    }
    let (sys, problem) = load_problem(&args.problem)?;
    let mut rows = Vec::new();
    let mut all_converged = true;
    for &s in &values {
        let mut pa = args.precond_args.clone();
        pa.s = s;
        let c = choice(&args.precond, &pa)?;
        let out = run_solve(&sys, &problem, &c, args.solver.tol, args.solver.maxit)?;
        all_converged &= out.report.converged;
        let kappa = if args.kappa {
            let pc = build_preconditioner(&sys, &c)?;
            Some(condition_number(&sys, pc.as_deref())?)
        } else {
            None
        };
        println!(
            "s={s:<8} IT={:<5} RES={}{}",
            out.record.it,
            format_res(out.record.res),
            kappa.map(|k| format!(" kappa={k:.6e}")).unwrap_or_default()
        );
        rows.push((s, out.record.it, out.record.res, kappa));
    }
    if let Some(path) = &args.output {
        write_sweep(path, &rows)?;
    }
    Ok(if all_converged { Status::Done } else { Status::NotConverged })
}

fn write_sweep(path: &Path, rows: &[(f64, usize, f64, Option<f64>)]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "s,it,res,kappa")?;
    for (s, it, res, kappa) in rows {
        let k = kappa.map(|k| format!("{k:.17e}")).unwrap_or_default();
        writeln!(f, "{s},{it},{},{k}", format_res(*res))?;
    }
    Ok(())
}

pub fn sensitivity(args: &SensitivityArgs) -> Result<Status> {
    let (sys, problem) = load_problem(&args.problem)?;
    let mut g = GssChoice::new(GssKind::Pess, Case::II, args.s);
    g.lambda3_coef = args.lambda3_coef;
    let c = PrecondChoice::Gss(g);
    let d = sys.rhs_for_ones();
    let base = run_solve_rhs(&sys, &problem, &c, &d, args.solver.tol, args.solver.maxit)?;
    let u = base.report.solution.to_flat();
    let mut all_converged = base.report.converged;
    let mut rows = Vec::new();
    println!("unperturbed IT={} RES={}", base.record.it, format_res(base.record.res));
    for &np in &args.noise {
        let noisy = perturb(&sys, &NoiseSpec::new(np, args.seed))?;
        // The right-hand side stays that of the unperturbed system.
        let out = run_solve_rhs(&noisy, &problem, &c, &d, args.solver.tol, args.solver.maxit)?;
        all_converged &= out.report.converged;
        let err = out
            .report
            .solution
            .to_flat()
            .iter()
            .zip(&u)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        println!("N_P={np:<5} error={err:.6e} IT={}", out.record.it);
        rows.push((np, err, out.record.it));
    }
    if let Some(path) = &args.output {
        let mut f = std::fs::File::create(path)?;
        writeln!(f, "np,error,it")?;
        for (np, err, it) in &rows {
            writeln!(f, "{np},{err:.17e},{it}")?;
        }
    }
    Ok(if all_converged { Status::Done } else { Status::NotConverged })
}

pub fn params(args: &ParamsArgs) -> Result<Status> {
    let (sys, problem) = load_problem(&args.problem)?;
    let lpess = args.preset.as_deref() == Some("lpess-II");
    let (_, est) = estimated_config(&sys, lpess, args.lambda3_coef)?;
    println!(
        "s_est={:.6e} beta_est={:.6e} |A|={:.6e} |B|={:.6e} |C'L3^-1C|={:.6e}{}",
        est.s_est,
        est.beta_est,
        est.norms.a,
        est.norms.b,
        est.norms.ct_lambda3_c,
        if est.norms.converged {
            ""
        } else {
            " (power iteration not converged)"
        }
    );

    if let Some(grid) = &args.phi_grid {
        let values = parse_range(grid)?;
        if values.is_empty() {
            bail!("the phi grid is empty");
        }
        let case: Case = args.case.parse()?;
        let triple = case_preset(case, &sys, args.lambda3_coef)?;
        let cfg = pess_core::precond::make_config(triple.pess(1.0), sys.dims())?;
        let terms = PhiTerms::new(&sys, &cfg);
        let mut best = (f64::NAN, f64::INFINITY);
        for &s in &values {
            let v = terms.phi(s);
            if v < best.1 {
                best = (s, v);
            }
            println!("s={s:<10} phi={v:.10e}");
        }
        println!("grid minimum at s={}; analytic minimizer s*={:.10e}", best.0, terms.minimizer());
    }

    if args.preset.is_some() {
        let c = PrecondChoice::Estimated {
            lpess,
            lambda3_coef: args.lambda3_coef,
        };
        let out = run_solve(&sys, &problem, &c, args.solver.tol, args.solver.maxit)?;
        print_record(&out.record, out.report.converged);
        if !out.report.converged {
            return Ok(Status::NotConverged);
        }
    }
    Ok(Status::Done)
}
