//! Experiment driver for the hybrid LCHS simulator: configuration, commands and reports.

pub mod cache;
pub mod commands;
pub mod config;
pub mod report;

use std::path::PathBuf;

/// Failures of a command, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("{stage} failed: {source}")]
    Numerical {
        stage: &'static str,
        #[source]
        source: hybrid_lchs::Error,
    },
    #[error("gate-count mismatch: {0}")]
    Mismatch(String),
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for invalid input, 3 for numerical failures, 4 for count mismatches, 1 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Mismatch(_) => 4,
            CliError::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

/// Attaches the failing stage to a library error.
pub(crate) trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError>;
}

impl<T> Stage<T> for hybrid_lchs::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numerical { stage, source })
    }
}
