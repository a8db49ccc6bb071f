//! Run reports: JSON and CSV emission and the input digest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;
use crate::run::CheckResult;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Column-labelled numeric table, first column is time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    /// Rows with non-finite values are dropped.
    pub fn new(name: &str, columns: &[&str], rows: Vec<Vec<f64>>) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: rows.into_iter().filter(|r| r.iter().all(|x| x.is_finite())).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub artifact_version: String,
    /// SHA-256 of the canonical config JSON and the artifact version.
    pub input_digest: String,
    pub seed: Option<u64>,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
    /// The config as run, after overrides; reloading a report yields it.
    pub config: ScenarioConfig,
    /// The only field that varies between identical runs.
    pub wall_time_s: f64,
}

impl RunReport {
    /// JSON with the wall time zeroed, byte-identical across reruns.
    pub fn canonical_json(&self) -> String {
        let mut r = self.clone();
        r.wall_time_s = 0.0;
        serde_json::to_string_pretty(&r).expect("report serializes")
    }
}

pub fn input_digest(cfg: &ScenarioConfig) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(cfg).expect("config serializes"));
    h.update(b"\0");
    h.update(ARTIFACT_VERSION.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> ReportError + '_ {
    move |source| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes the report; returns every file written.
///
/// `json` writes the full report to `path`. `csv` writes `(check, verdict, metric, value,
/// tolerance)` rows to `path` and one `<stem>.<check>.<series>.csv` per trajectory beside it.
pub fn emit_report(report: &RunReport, format: Format, path: &Path) -> Result<Vec<PathBuf>, ReportError> {
    match format {
        Format::Json => {
            let mut w = BufWriter::new(File::create(path).map_err(io(path))?);
            serde_json::to_writer_pretty(&mut w, report).map_err(|e| io(path)(e.into()))?;
            w.write_all(b"\n").map_err(io(path))?;
            w.flush().map_err(io(path))?;
            Ok(vec![path.to_path_buf()])
        }
        Format::Csv => {
            let mut written = vec![path.to_path_buf()];
            let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
            w.write_record(["check", "verdict", "metric", "value", "tolerance"]).map_err(csv_err(path))?;
            for c in &report.checks {
                let tol = c.tolerance.to_string();
                if c.metrics.is_empty() {
                    w.write_record([c.name.as_str(), c.verdict.as_str(), "", "", tol.as_str()])
                        .map_err(csv_err(path))?;
                }
                for (k, v) in &c.metrics {
                    w.write_record([c.name.as_str(), c.verdict.as_str(), k.as_str(), v.to_string().as_str(), tol.as_str()])
                        .map_err(csv_err(path))?;
                }
            }
            w.flush().map_err(io(path))?;
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
            let dir = path.parent().unwrap_or(Path::new("."));
            for c in &report.checks {
                for s in &c.trajectories {
                    let file = dir.join(format!("{stem}.{}.{}.csv", sanitize(&c.name), sanitize(&s.name)));
                    let mut w = csv::Writer::from_path(&file).map_err(csv_err(&file))?;
                    w.write_record(&s.columns).map_err(csv_err(&file))?;
                    for row in &s.rows {
                        w.write_record(row.iter().map(|x| x.to_string())).map_err(csv_err(&file))?;
                    }
                    w.flush().map_err(io(&file))?;
                    written.push(file);
                }
            }
            Ok(written)
        }
    }
}

/// File-name-safe form of a check name.
pub fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_drop_non_finite_rows() {
        let s = Series::new("x", &["t", "v"], vec![vec![1.0, 2.0], vec![2.0, f64::NAN], vec![3.0, 1.0]]);
        assert_eq!(s.rows.len(), 2);
    }

    #[test]
    fn sanitize_keeps_names_readable() {
        assert_eq!(sanitize("equivalence:S1:S2"), "equivalence_S1_S2");
    }
}
