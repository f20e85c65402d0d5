//! Experiment driver for the data-driven input estimator: configuration,
//! scenario runs, reports and CSV I/O. The `uirecon` binary is a thin
//! wrapper over this library.

pub mod config;
pub mod io;
pub mod report;
pub mod scenario;

use std::path::PathBuf;

pub use config::{DelayChoice, InitGuess, ScenarioConfig, SystemChoice};
pub use io::{emit_plot_data, load_trajectory, save_report, save_trajectory};
pub use report::{CertificateSummary, RunReport};
pub use scenario::{certify, invert_oracle, prepare, run_batch, run_scenario, OracleGain};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        msg: String,
    },
    #[error(transparent)]
    Core(#[from] uirecon_core::Error),
    #[error("JSON serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}
