use std::path::PathBuf;

use polydg_core::error::{MeshError, SetupError, StepError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("mesh error: {0}")]
    Mesh(#[from] MeshError),
    #[error("{0}")]
    Setup(#[from] SetupError),
    #[error("solver failure: {0}")]
    Step(#[from] StepError),
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

impl CliError {
    /// Process exit code: 2 for configuration problems, 3 for solver failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Parse { .. } | CliError::Mesh(_) => 2,
            CliError::Setup(SetupError::Config(_)) => 2,
            CliError::Setup(_) | CliError::Step(_) => 3,
            CliError::Io { .. } | CliError::Csv { .. } => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}
