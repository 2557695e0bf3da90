use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// Invalid configuration, arguments or malformed input file.
    pub const VALIDATION: i32 = 2;
    pub const IO: i32 = 3;
    pub const NO_FEASIBLE_SOLUTION: i32 = 4;
    /// `evaluate --papr-threshold` found a sequence above the threshold.
    pub const THRESHOLD_EXCEEDED: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{context}: {source}")]
    Core { context: String, source: seqforge_core::Error },

    #[error("no feasible solution: no iterate ever satisfied the PAPR threshold")]
    NoFeasibleSolution,

    #[error("maximum PAPR {max_papr} exceeds threshold {threshold}")]
    ThresholdExceeded { max_papr: f64, threshold: f64 },
}

impl CliError {
    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Validation { field: field.into(), reason: reason.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn core(context: impl Into<String>, source: seqforge_core::Error) -> Self {
        match source {
            seqforge_core::Error::Io(e) => CliError::Io { path: PathBuf::from(context.into()), source: e },
            other => CliError::Core { context: context.into(), source: other },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } | CliError::Core { .. } => exit::VALIDATION,
            CliError::Io { .. } => exit::IO,
            CliError::NoFeasibleSolution => exit::NO_FEASIBLE_SOLUTION,
            CliError::ThresholdExceeded { .. } => exit::THRESHOLD_EXCEEDED,
        }
    }
}

impl From<seqforge_core::Error> for CliError {
    fn from(e: seqforge_core::Error) -> Self {
        match e {
            seqforge_core::Error::Validation { field, reason } => CliError::validation(field, reason),
            other => CliError::core("error", other),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
