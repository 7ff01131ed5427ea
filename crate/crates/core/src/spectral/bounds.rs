use super::ScalarExtremes;
use crate::dense::ComplexSpectrum;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;

/// Slack on `|λ − 1| < 1`.
pub const DISK_SLACK: f64 = 1e-9;
/// Slack on the PESS real interval.
pub const INTERVAL_SLACK: f64 = 1e-9;
/// Slack on the modulus, μ-plane and annulus bounds.
pub const BOUND_SLACK: f64 = 1e-6;
/// Distance to 1/s under which an LPESS eigenvalue joins the cluster.
pub const CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub eigenvalue: Complex64,
    /// How far outside the bound the eigenvalue sits.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenVerdict {
    pub eigenvalue: Complex64,
    pub ok: bool,
    /// Which alternative was satisfied, for bounds that are a disjunction.
    pub branch: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub theorem: String,
    pub bounds: BTreeMap<String, f64>,
    pub verdicts: Vec<EigenVerdict>,
    pub violations: Vec<Violation>,
    pub metadata: BTreeMap<String, String>,
}

impl BoundReport {
    fn new(theorem: &str) -> Self {
        BoundReport {
            theorem: theorem.into(),
            bounds: BTreeMap::new(),
            verdicts: Vec::new(),
            violations: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn bound(&self, key: &str) -> Option<f64> {
        self.bounds.get(key).copied()
    }

    fn record(&mut self, eigenvalue: Complex64, margin: f64, slack: f64, branch: Option<String>) {
        let ok = margin <= slack;
        self.verdicts.push(EigenVerdict { eigenvalue, ok, branch });
        if !ok {
            self.violations.push(Violation { eigenvalue, margin });
        }
    }
}

/// Distance of `x` outside `[lo, hi]`, zero inside.
fn outside(x: f64, lo: f64, hi: f64) -> f64 {
    (lo - x).max(x - hi).max(0.0)
}

/// Every eigenvalue within the disk `|λ − 1| < 1`.
pub fn check_unit_disk(spectrum: &ComplexSpectrum, s: f64) -> BoundReport {
    let mut rep = BoundReport::new("unit-disk");
    rep.bounds.insert("center".into(), 1.0);
    rep.bounds.insert("radius".into(), 1.0);
    rep.metadata.insert("s".into(), s.to_string());
    if s < 0.5 {
        rep.metadata.insert("note".into(), "s < 1/2, containment not guaranteed".into());
    }
    for &z in &spectrum.eigenvalues {
        let margin = (z - 1.0).norm() - 1.0;
        let ok = margin < DISK_SLACK;
        rep.verdicts.push(EigenVerdict {
            eigenvalue: z,
            ok,
            branch: None,
        });
        if !ok {
            rep.violations.push(Violation { eigenvalue: z, margin });
        }
    }
    rep
}

fn require_pess(extremes: &ScalarExtremes) -> Result<()> {
    if extremes.xi.is_none() {
        return Err(Error::InapplicableBound("PESS bounds need an SPD Λ1".into()));
    }
    Ok(())
}

/// `(0, ξmax/(1+sξmax)]`.
pub fn pess_real_interval(extremes: &ScalarExtremes, s: f64) -> Result<(f64, f64)> {
    let xi_max = extremes.xi_max()?;
    Ok((0.0, xi_max / (1.0 + s * xi_max)))
}

/// Real eigenvalues of a PESS-preconditioned operator against
/// [`pess_real_interval`], with `slack` on both endpoints.
pub fn check_pess_real_interval(spectrum: &ComplexSpectrum, extremes: &ScalarExtremes, s: f64, slack: f64) -> Result<BoundReport> {
    let (lo, hi) = pess_real_interval(extremes, s)?;
    let mut rep = BoundReport::new("pess-real-interval");
    rep.bounds.insert("lower".into(), lo);
    rep.bounds.insert("upper".into(), hi);
    for &z in &spectrum.eigenvalues {
        if spectrum.is_real(z) {
            rep.record(z, outside(z.re, lo, hi), slack, None);
        }
    }
    Ok(rep)
}

/// `μ = λ/(1 − sλ)`, `None` when `1 − sλ` vanishes.
fn mu_transform(z: Complex64, s: f64) -> Option<Complex64> {
    let den = 1.0 - s * z;
    (den.norm() > 1e-12).then(|| z / den)
}

/// Non-real eigenvalues of a PESS-preconditioned operator.
///
/// Each eigenvalue must satisfy at least one of
/// - part 1: `ξmin/(2+sξmin) ≤ |λ| ≤ √(ηmax/(1+sξmin+s²ηmax))`
/// - part 2: `ξminηmin/(2(ξmax²+ηmax+θmax)) ≤ Re μ ≤ ξmax/2` and
///   `|Im μ| ≤ √(ηmax+θmax)`, with `μ = λ/(1−sλ)`.
///
/// The two parts correspond to eigenvectors with `Cv = 0` and `Cv ≠ 0`,
/// which cannot be told apart from the eigenvalue alone.
pub fn pess_nonreal_bounds(spectrum: &ComplexSpectrum, extremes: &ScalarExtremes, s: f64, slack: f64) -> Result<BoundReport> {
    require_pess(extremes)?;
    let (xmin, xmax) = (extremes.xi_min()?, extremes.xi_max()?);
    let (emin, emax) = (extremes.eta_min()?, extremes.eta_max()?);
    let tmax = extremes.theta_max;

    let mod_lo = xmin / (2.0 + s * xmin);
    let mod_hi = (emax / (1.0 + s * xmin + s * s * emax)).sqrt();
    let re_lo = xmin * emin / (2.0 * (xmax * xmax + emax + tmax));
    let re_hi = xmax / 2.0;
    let im_hi = (emax + tmax).sqrt();

    let mut rep = BoundReport::new("pess-nonreal");
    rep.bounds.insert("modulus_lower".into(), mod_lo);
    rep.bounds.insert("modulus_upper".into(), mod_hi);
    rep.bounds.insert("re_mu_lower".into(), re_lo);
    rep.bounds.insert("re_mu_upper".into(), re_hi);
    rep.bounds.insert("im_mu_upper".into(), im_hi);

    for &z in &spectrum.eigenvalues {
        if spectrum.is_real(z) {
            continue;
        }
        let m1 = outside(z.norm(), mod_lo, mod_hi);
        let m2 = match mu_transform(z, s) {
            Some(mu) => outside(mu.re, re_lo, re_hi).max(outside(mu.im.abs(), 0.0, im_hi)),
            None => f64::INFINITY,
        };
        let branch = match (m1 <= slack, m2 <= slack) {
            (true, true) => Some("both".to_string()),
            (true, false) => Some("part1".to_string()),
            (false, true) => Some("part2".to_string()),
            (false, false) => None,
        };
        rep.record(z, m1.min(m2), slack, branch);
    }
    Ok(rep)
}

/// Bounds for LPESS-type configurations (Λ1 dropped, t = s).
///
/// Checks that at least `n` eigenvalues lie within `cluster_tol` of `1/s`,
/// that the remaining real ones lie in
/// `[min{ϑmin/(1+sϑmin), θ̃min/(ϑmax+sθ̃min)}, ϑmax/(1+sϑmax)]`, and that the
/// remaining non-real ones satisfy both
/// `ϑmin/(2+sϑmin) ≤ |λ| ≤ √(θ̃max/(1+sϑmin+s²θ̃max))` and
/// `1/(s(1+s√θ̃max)) ≤ |λ−1/s| ≤ 2/(s(2+sϑmin))`.
pub fn lpess_bounds(
    spectrum: &ComplexSpectrum,
    extremes: &ScalarExtremes,
    s: f64,
    n: usize,
    slack: f64,
    cluster_tol: f64,
) -> Result<BoundReport> {
    if extremes.xi.is_some() {
        return Err(Error::InapplicableBound("LPESS bounds need Λ1 = 0".into()));
    }
    let (vmin, vmax) = extremes.vartheta;
    let (tmin, tmax) = extremes.theta_tilde;
    let center = 1.0 / s;

    let real_lo = (vmin / (1.0 + s * vmin)).min(tmin / (vmax + s * tmin));
    let real_hi = vmax / (1.0 + s * vmax);
    let mod_lo = vmin / (2.0 + s * vmin);
    let mod_hi = (tmax / (1.0 + s * vmin + s * s * tmax)).sqrt();
    let ann_lo = 1.0 / (s * (1.0 + s * tmax.sqrt()));
    let ann_hi = 2.0 / (s * (2.0 + s * vmin));

    let mut rep = BoundReport::new("lpess");
    rep.bounds.insert("cluster".into(), center);
    rep.bounds.insert("real_lower".into(), real_lo);
    rep.bounds.insert("real_upper".into(), real_hi);
    rep.bounds.insert("modulus_lower".into(), mod_lo);
    rep.bounds.insert("modulus_upper".into(), mod_hi);
    rep.bounds.insert("annulus_lower".into(), ann_lo);
    rep.bounds.insert("annulus_upper".into(), ann_hi);
    rep.metadata
        .insert("theta_tilde_form".into(), extremes.theta_tilde_form.to_string());

    // the n eigenvalues closest to 1/s form the cluster
    let mut by_distance: Vec<Complex64> = spectrum.eigenvalues.clone();
    by_distance.sort_by(|a, b| (a - center).norm().total_cmp(&(b - center).norm()));
    let cluster = by_distance.iter().take_while(|z| (*z - center).norm() <= cluster_tol).count();
    rep.bounds.insert("cluster_multiplicity".into(), cluster as f64);
    if cluster < n {
        rep.violations.push(Violation {
            eigenvalue: Complex64::new(center, 0.0),
            margin: (n - cluster) as f64,
        });
    }

    for &z in by_distance.iter().skip(cluster) {
        if spectrum.is_real(z) {
            rep.record(z, outside(z.re, real_lo, real_hi), slack, Some("real".into()));
        } else {
            let m1 = outside(z.norm(), mod_lo, mod_hi);
            let m2 = outside((z - center).norm(), ann_lo, ann_hi);
            rep.record(z, m1.max(m2), slack, Some("nonreal".into()));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::super::ThetaTildeForm;
    use super::*;

    fn spectrum(values: &[(f64, f64)]) -> ComplexSpectrum {
        ComplexSpectrum::new(values.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
    }

    fn pess_extremes() -> ScalarExtremes {
        ScalarExtremes {
            xi: Some((1.0, 1.0)),
            eta: Some((0.5, 1.0)),
            theta_max: 4.0,
            vartheta: (0.5, 1.0),
            theta_tilde: (1.0, 4.0),
            theta_tilde_form: ThetaTildeForm::default(),
        }
    }

    #[test]
    fn disk_cases() {
        assert!(check_unit_disk(&spectrum(&[(1.0, 0.0)]), 1.0).holds());
        let rep = check_unit_disk(&spectrum(&[(2.5, 0.0)]), 1.0);
        assert_eq!(rep.violations.len(), 1);
        assert!((rep.violations[0].margin - 0.5).abs() < 1e-15);
    }

    #[test]
    fn real_interval_endpoint() {
        let (_, hi) = pess_real_interval(&pess_extremes(), 13.0).unwrap();
        assert!((hi - 1.0 / 14.0).abs() < 1e-15);
        let mut last = f64::INFINITY;
        for s in [1.0, 10.0, 100.0, 1000.0] {
            let (_, hi) = pess_real_interval(&pess_extremes(), s).unwrap();
            assert!(hi < last);
            last = hi;
        }
        let rep = check_pess_real_interval(&spectrum(&[(0.05, 0.0), (0.08, 0.0)]), &pess_extremes(), 13.0, 1e-9).unwrap();
        assert_eq!(rep.violations.len(), 1);
    }

    #[test]
    fn all_real_spectrum_is_vacuous() {
        let rep = pess_nonreal_bounds(&spectrum(&[(0.05, 0.0)]), &pess_extremes(), 13.0, 1e-6).unwrap();
        assert!(rep.holds() && rep.verdicts.is_empty());
    }

    #[test]
    fn wrong_family_is_inapplicable() {
        let mut ex = pess_extremes();
        assert!(lpess_bounds(&spectrum(&[]), &ex, 1.0, 0, 1e-6, 1e-8).is_err());
        ex.xi = None;
        ex.eta = None;
        assert!(pess_nonreal_bounds(&spectrum(&[]), &ex, 1.0, 1e-6).is_err());
        assert!(pess_real_interval(&ex, 1.0).is_err());
    }

    #[test]
    fn lpess_cluster_count() {
        let mut ex = pess_extremes();
        ex.xi = None;
        ex.eta = None;
        let sp = spectrum(&[(0.5, 0.0), (0.5 + 1e-10, 0.0), (0.3, 0.0)]);
        let rep = lpess_bounds(&sp, &ex, 2.0, 2, 1e-6, 1e-8).unwrap();
        assert_eq!(rep.bound("cluster_multiplicity"), Some(2.0));
        let rep = lpess_bounds(&sp, &ex, 2.0, 3, 1e-6, 1e-8).unwrap();
        assert!(!rep.holds());
    }
}
