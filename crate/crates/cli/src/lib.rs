//! Batch experiment runner: validates JSON configs against the published
//! schema, executes the named experiment, and writes deterministic JSON/CSV
//! artifacts (same config and seed give identical results for any worker
//! count; only the timestamp field varies between runs).

pub mod config;
pub mod experiments;
pub mod plot;
pub mod record;

use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::record::ResultRecord;

pub const EXIT_CHECKS_FAILED: i32 = 1;
pub const EXIT_BAD_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Numerical(String),
    Io(std::io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "invalid config: {m}"),
            RunError::Numerical(m) => write!(f, "numerical failure: {m}"),
            RunError::Io(e) => write!(f, "io: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

pub struct RunOutcome {
    pub record: ResultRecord,
    pub artifacts: Vec<PathBuf>,
}

/// Loads, validates, runs, and writes artifacts.
pub fn run_config_file(
    path: &Path,
    seed_override: Option<u64>,
    out_dir_override: Option<&Path>,
    workers: usize,
    quiet: bool,
) -> Result<RunOutcome, RunError> {
    let text = std::fs::read_to_string(path).map_err(RunError::Io)?;
    let mut config = config::parse_config(&text).map_err(RunError::Config)?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    let out_dir = out_dir_override
        .map(|p| p.to_path_buf())
        .or_else(|| config.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    run_experiment(config, &out_dir, workers, quiet)
}

/// Runs an already-validated config and writes artifacts.
pub fn run_experiment(
    config: ExperimentConfig,
    out_dir: &Path,
    workers: usize,
    quiet: bool,
) -> Result<RunOutcome, RunError> {
    let outcome =
        experiments::run(&config, workers).map_err(|e| RunError::Numerical(format!("{e:#}")))?;
    let record = ResultRecord::new(config, outcome.checks, outcome.tables);
    if !quiet {
        for check in &record.checks {
            println!(
                "{} {}: {}",
                if check.pass { "PASS" } else { "FAIL" },
                check.name,
                check.detail
            );
        }
    }
    let artifacts = record.write_artifacts(out_dir).map_err(RunError::Io)?;
    Ok(RunOutcome { record, artifacts })
}

/// Default worker count: GAUGELAB_WORKERS or 1.
pub fn default_workers() -> usize {
    std::env::var("GAUGELAB_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&w| w >= 1)
        .unwrap_or(1)
}
