use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("I/O error on {path}: {message}")]
    Io { path: PathBuf, message: String },

    #[error("malformed trace {path}: {message}")]
    Trace { path: PathBuf, message: String },

    #[error("tuning failed: every grid point for `{method}` diverged or failed")]
    TuningFailed { method: String },

    #[error(transparent)]
    Core(#[from] hscale::Error),
}

impl BenchError {
    /// Process exit code: 1 for configuration problems, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config { .. } => 1,
            _ => 2,
        }
    }
}
