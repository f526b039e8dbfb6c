use std::process::ExitCode;

use pivotmodel::io::IoError;
use pivotmodel::pivot::PivotError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    /// Model, rule, address or view problems.
    #[error("{0}")]
    Validation(String),
    /// Data files that are missing, malformed or had rejected rows.
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Data(_) => 3,
            CliError::Internal(_) => 4,
        })
    }

    /// Errors from reading a model file; I/O trouble there is a usage error.
    pub fn model(err: PivotError) -> CliError {
        match err {
            PivotError::Io(IoError::File { .. }) => CliError::Usage(err.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }

    pub fn data(err: PivotError) -> CliError {
        match err {
            PivotError::Io(_) => CliError::Data(err.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }

    pub fn write(path: &str, err: impl std::fmt::Display) -> CliError {
        CliError::Internal(format!("writing {path}: {err}"))
    }
}
