use std::path::PathBuf;

use gaussdiv::ErrorKind;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] gaussdiv::Error),
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{}: row {row}, column {column}: `{value}` is not a finite number", path.display())]
    Parse {
        path: PathBuf,
        row: u64,
        column: usize,
        value: String,
    },
    #[error("{}: row {row} has {found} fields, expected {expected}", path.display())]
    InconsistentArity {
        path: PathBuf,
        row: u64,
        expected: usize,
        found: usize,
    },
    #[error("{}: {message}", path.display())]
    Csv { path: PathBuf, message: String },
    #[error("{}: invalid summary: {message}", path.display())]
    Summary { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("cannot serialize output: {0}")]
    Serialize(#[from] serde_json::Error),
}

/// Machine-readable error printed on stderr.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: &'static str,
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    /// 2 validation, 3 numerical, 4 infeasible selection, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.kind() {
                ErrorKind::Validation => 2,
                ErrorKind::Numerical => 3,
                ErrorKind::Infeasible => 4,
            },
            CliError::Read { .. }
            | CliError::Parse { .. }
            | CliError::InconsistentArity { .. }
            | CliError::Csv { .. }
            | CliError::Summary { .. }
            | CliError::Usage(_) => 2,
            CliError::Write { .. } | CliError::Serialize(_) => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.name(),
            CliError::Read { .. } => "ReadError",
            CliError::Write { .. } => "WriteError",
            CliError::Parse { .. } => "ParseError",
            CliError::InconsistentArity { .. } => "InconsistentArity",
            CliError::Csv { .. } => "CsvError",
            CliError::Summary { .. } => "InvalidSummary",
            CliError::Usage(_) => "UsageError",
            CliError::Serialize(_) => "SerializeError",
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport {
            error: self.name(),
            message: self.to_string(),
            exit_code: self.exit_code(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
