use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config {path}: {source}")]
    ConfigIo { path: PathBuf, source: std::io::Error },

    #[error("malformed config {path}: {message}")]
    ConfigSyntax { path: PathBuf, message: String },

    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },

    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },

    #[error("cannot read results {path}: {message}")]
    Results { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] holdup_core::Error),

    #[error("{failed} of {total} runs failed; outputs are incomplete")]
    RunFailures { failed: usize, total: usize },

    #[error("{0} table value(s) outside tolerance")]
    TableMismatch(usize),
}

impl CliError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Invalid { field: field.into(), reason: reason.into() }
    }

    pub(crate) fn output(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Output { path: path.into(), source }
    }

    /// Process exit status: 1 for anything wrong with the input, 2 for
    /// failures while running or writing.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ConfigIo { .. } | CliError::ConfigSyntax { .. } | CliError::Invalid { .. } => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
