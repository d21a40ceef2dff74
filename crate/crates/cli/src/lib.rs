//! Experiment runner behind the `lowdeg` binary.

pub mod config;
pub mod record;
pub mod runs;

use std::path::{Path, PathBuf};
use std::time::Instant;

use config::ExperimentConfig;
use record::ResultRecord;
use runs::{RunError, RunOutput};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

pub fn exit_code(err: &RunError) -> i32 {
    match err {
        RunError::Config(_) => EXIT_CONFIG,
        RunError::Budget(_) => EXIT_BUDGET,
        RunError::Failed(_) => EXIT_RUNTIME,
    }
}

/// Runs `cfg` and builds its record.
pub fn execute(cfg: &ExperimentConfig) -> Result<(ResultRecord, RunOutput), RunError> {
    let start = Instant::now();
    let out = runs::run(cfg)?;
    let record = ResultRecord {
        tool: "lowdeg".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        experiment: cfg.kind.to_string(),
        seed: cfg.seed(),
        config: cfg.serialize(),
        results: out.results.clone(),
        pass: out.pass,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok((record, out))
}

/// Writes `<kind>-<seed>.json` and `<kind>-<seed>.csv` under `dir`.
pub fn persist(dir: &Path, record: &ResultRecord, table: &str) -> std::io::Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let stem = format!("{}-{}", record.experiment, record.seed);
    let json = dir.join(format!("{stem}.json"));
    let csv = dir.join(format!("{stem}.csv"));
    let text = serde_json::to_string_pretty(record).map_err(std::io::Error::other)?;
    std::fs::write(&json, text + "\n")?;
    std::fs::write(&csv, table)?;
    Ok((json, csv))
}
