//! Experiment runner behind the `plancherel` command.

// parameter checks use negated comparisons so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
mod experiments;
pub mod output;

use std::path::PathBuf;

use serde::Serialize;

pub use config::{Experiment, ExperimentConfig};
pub use experiments::DEFAULT_SEPARATION;
pub use output::OutputSink;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] plancherel_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) | Self::Core(_) => 1,
            Self::Io(_) | Self::Csv(_) | Self::Json(_) => 3,
        }
    }
}

/// A named pass/fail check with a short explanation.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Outcome {
    pub experiment: Option<Experiment>,
    pub lines: Vec<String>,
    pub checks: Vec<Check>,
    pub summary: serde_json::Value,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// 0 when every check passed, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            2
        }
    }
}

/// Validates `cfg`, runs it on a pool of `thread_count` workers and writes
/// its outputs. Nothing is left on disk if the run fails.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome, LabError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.thread_count.unwrap_or(0))
        .build()
        .map_err(|e| LabError::Validation(e.to_string()))?;
    let mut sink = OutputSink::new(cfg.out_dir.as_deref(), cfg.reproducible)?;
    match pool.install(|| experiments::dispatch(cfg, &mut sink)) {
        Ok(mut outcome) => {
            outcome.files = sink.files().to_vec();
            Ok(outcome)
        }
        Err(e) => {
            sink.cleanup();
            Err(e)
        }
    }
}
