use super::{BoundReport, ScalarExtremes};
use crate::dense::ComplexSpectrum;
use crate::error::Result;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::Path;

/// Everything the `spectrum` command writes as JSON.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub label: String,
    pub size: usize,
    pub s: f64,
    pub real_count: usize,
    pub nonreal_count: usize,
    pub spectral_radius: f64,
    pub extremes: Option<ScalarExtremes>,
    pub bounds: Vec<BoundReport>,
    pub metadata: BTreeMap<String, String>,
}

impl SpectralReport {
    pub fn new(label: impl Into<String>, s: f64, spectrum: &ComplexSpectrum) -> Self {
        let real_count = spectrum.eigenvalues.iter().filter(|z| spectrum.is_real(**z)).count();
        SpectralReport {
            label: label.into(),
            size: spectrum.len(),
            s,
            real_count,
            nonreal_count: spectrum.len() - real_count,
            spectral_radius: spectrum.spectral_radius(),
            extremes: None,
            bounds: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn holds(&self) -> bool {
        self.bounds.iter().all(BoundReport::holds)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

#[derive(Serialize)]
struct EigenRow {
    re: f64,
    im: f64,
    classification: &'static str,
}

/// One row per eigenvalue: `re,im,classification` with classification
/// `real` or `complex`.
pub fn write_eigenvalue_csv(spectrum: &ComplexSpectrum, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for z in spectrum.sorted() {
        w.serialize(EigenRow {
            re: z.re,
            im: z.im,
            classification: if spectrum.is_real(z) { "real" } else { "complex" },
        })?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn csv_has_header_and_rows() {
        let sp = ComplexSpectrum::new(vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.25)]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("eig.csv");
        write_eigenvalue_csv(&sp, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "re,im,classification");
        assert_eq!(lines[1], "0.5,0.25,complex");
        assert_eq!(lines[2], "1.0,0.0,real");
    }

    #[test]
    fn report_counts() {
        let sp = ComplexSpectrum::new(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.5, 0.25),
            Complex64::new(0.5, -0.25),
        ]);
        let rep = SpectralReport::new("x", 1.0, &sp);
        assert_eq!((rep.real_count, rep.nonreal_count), (1, 2));
        assert!(rep.to_json().unwrap().contains("\"label\": \"x\""));
    }
}
