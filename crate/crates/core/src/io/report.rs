use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// One row of an experiment table. A run converged exactly when `res` is
/// below the tolerance echoed in `params`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub process: String,
    pub problem: String,
    pub size: usize,
    pub it: usize,
    /// Final relative residual, written as e.g. `8.2852e-07`.
    #[serde(serialize_with = "ser_res", deserialize_with = "de_res")]
    pub res: f64,
    pub wall_seconds: f64,
    /// Every parameter of the run, `key=value` pairs joined by `;`.
    pub params: String,
}

fn ser_res<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_res(*v))
}

fn de_res<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    let text = String::deserialize(d)?;
    text.parse().map_err(serde::de::Error::custom)
}

/// Scientific notation with four decimals and a signed two-digit exponent.
pub fn format_res(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let s = format!("{v:.4e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidArgument(format!("unknown report format `{other}`"))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        })
    }
}

pub const CSV_HEADER: [&str; 7] = ["process", "problem", "size", "it", "res", "wall_seconds", "params"];

pub fn write_report(records: &[ReportRecord], format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    match format {
        ReportFormat::Json => {
            std::fs::write(path, serde_json::to_string_pretty(records)?)?;
        }
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
            w.write_record(CSV_HEADER)?;
            for r in records {
                w.serialize(r)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn read_report_csv(path: impl AsRef<Path>) -> Result<Vec<ReportRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn res_formatting() {
        assert_eq!(format_res(8.2852e-7), "8.2852e-07");
        assert_eq!(format_res(1.0), "1.0000e+00");
        assert_eq!(format_res(3.5e120), "3.5000e+120");
        assert_eq!(format_res(0.0), "0.0000e+00");
    }

    fn record() -> ReportRecord {
        ReportRecord {
            process: "PESS".into(),
            problem: "example1-l16".into(),
            size: 1024,
            it: 2,
            res: 1.2345e-9,
            wall_seconds: 0.25,
            params: "s=12;t=12".into(),
        }
    }

    #[test]
    fn empty_csv_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_report(&[], ReportFormat::Csv, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().trim_end(), CSV_HEADER.join(","));
    }

    #[test]
    fn csv_and_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_report(&[record()], ReportFormat::Csv, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("1.2345e-09"));
        assert_eq!(read_report_csv(&path).unwrap(), vec![record()]);

        let jpath = dir.path().join("r.json");
        write_report(&[record()], ReportFormat::Json, &jpath).unwrap();
        let back: Vec<ReportRecord> = serde_json::from_str(&std::fs::read_to_string(&jpath).unwrap()).unwrap();
        assert_eq!(back, vec![record()]);
    }
}
