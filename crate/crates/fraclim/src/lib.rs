//! Experiment plumbing for `fraclim-core`: TOML configurations, result
//! records (CSV, JSON, JSON lines), parameter sweeps and the acceptance
//! suite. The `fraclim` binary wraps these.

pub mod acceptance;
pub mod config;
pub mod record;
pub mod sweep;

pub use acceptance::{run_acceptance, AcceptanceOptions, AcceptanceReport, Criterion};
pub use config::{Experiment, ExperimentConfig};
pub use record::ResultRecord;
pub use sweep::{run_sweep, SweepOutcome};

/// Environment variable read for the worker count when `--threads` is absent.
pub const THREADS_ENV: &str = "FRACLIM_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    /// Unreadable or invalid configuration (exit status 2).
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Core(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            _ => 1,
        }
    }
}
