//! Experiment driver behind the `gurtin-lab` binary.
//!
//! A run reads one JSON configuration, executes the named experiment and
//! writes CSV and JSON artifacts plus a `manifest.json` into the output
//! directory. See the README for the file schemas.

pub mod config;
pub mod plots;
mod run;

use std::path::PathBuf;

pub use run::{run, run_config, RunSummary};

/// Overrides `output_dir`.
pub const ENV_OUT_DIR: &str = "GURTIN_OUT_DIR";
/// Overrides `workers`.
pub const ENV_WORKERS: &str = "GURTIN_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Numerics(#[from] gurtin::Error),
}

impl RunError {
    /// 1 for configuration and i/o problems, 2 when a computation or check fails.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config { .. } | RunError::Io { .. } => 1,
            RunError::Assertion(_) | RunError::Numerics(_) => 2,
        }
    }
}
