//! Run records and the report aggregator.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// One named number, optionally tagged with the `n` and `eps` it refers to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultEntry {
    pub name: String,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub eps: Option<f64>,
    pub value: f64,
    #[serde(default)]
    pub stderr: f64,
}

impl ResultEntry {
    pub fn new(name: impl Into<String>, value: f64, stderr: f64) -> Self {
        ResultEntry {
            name: name.into(),
            n: None,
            eps: None,
            value,
            stderr,
        }
    }

    pub fn at(mut self, n: usize, eps: Option<f64>) -> Self {
        self.n = Some(n);
        self.eps = eps;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub seed: u64,
    /// Canonical configuration text.
    pub config: String,
    pub results: Vec<ResultEntry>,
    pub pass: bool,
    pub wall_time_s: f64,
}

pub const REPORT_HEADER: &str = "experiment,n,eps,name,value,stderr,seed,source";

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub experiment: String,
    pub n: Option<usize>,
    pub eps: Option<f64>,
    pub name: String,
    pub value: f64,
    pub stderr: f64,
    pub seed: u64,
    pub source: String,
}

#[derive(Debug, Default)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    /// Files that matched but could not be read as records.
    pub malformed: Vec<(PathBuf, String)>,
}

/// Reads every record matched by the glob patterns. Rows are sorted by
/// `(experiment, n, eps)`, keeping file order otherwise.
pub fn collect(patterns: &[String]) -> Result<Report, String> {
    let mut files = Vec::new();
    for p in patterns {
        let paths = glob::glob(p).map_err(|e| format!("bad pattern `{p}`: {e}"))?;
        for entry in paths {
            match entry {
                Ok(path) => files.push(path),
                Err(e) => return Err(e.to_string()),
            }
        }
    }
    files.sort();
    files.dedup();
    let mut report = Report::default();
    for f in files {
        match read_record(&f) {
            Ok(rec) => {
                for e in rec.results {
                    report.rows.push(ReportRow {
                        experiment: rec.experiment.clone(),
                        n: e.n,
                        eps: e.eps,
                        name: e.name,
                        value: e.value,
                        stderr: e.stderr,
                        seed: rec.seed,
                        source: f.display().to_string(),
                    });
                }
            }
            Err(e) => report.malformed.push((f, e)),
        }
    }
    report.rows.sort_by(|a, b| {
        a.experiment
            .cmp(&b.experiment)
            .then(a.n.cmp(&b.n))
            .then(a.eps.unwrap_or(f64::NEG_INFINITY).total_cmp(&b.eps.unwrap_or(f64::NEG_INFINITY)))
    });
    Ok(report)
}

fn read_record(path: &Path) -> Result<ResultRecord, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Report {
    pub fn csv(&self) -> String {
        let mut out = format!("{REPORT_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{:e},{:e},{},{}",
                r.experiment,
                opt(r.n),
                opt(r.eps),
                r.name,
                r.value,
                r.stderr,
                r.seed,
                r.source
            );
        }
        out
    }

    pub fn table(&self) -> String {
        let mut out = format!(
            "{:<12} {:>6} {:>6} {:<24} {:>14} {:>12}\n",
            "experiment", "n", "eps", "name", "value", "stderr"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<12} {:>6} {:>6} {:<24} {:>14.6e} {:>12.3e}",
                r.experiment,
                opt(r.n),
                opt(r.eps),
                r.name,
                r.value,
                r.stderr
            );
        }
        out
    }
}
