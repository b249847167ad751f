use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Boxed error returned by user objectives.
pub type ObjectiveError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("value {value} is outside the domain of `{param}`")]
    OutOfDomain { param: String, value: String },

    #[error("invalid search space: {0}")]
    InvalidSpace(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("need at least {needed} experience entries, have {found}")]
    InsufficientExperience { needed: usize, found: usize },

    #[error("configuration already present in experience")]
    DuplicateConfiguration,

    #[error("invalid budget: {0}")]
    InvalidBudget(String),

    #[error("objective failed after {completed} of {budget} evaluations: {source}")]
    Objective {
        completed: usize,
        budget: usize,
        #[source]
        source: ObjectiveError,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("{path}: {message}")]
    Spec { path: PathBuf, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the `chpo` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Spec { .. } => 2,
            Error::Dataset(_) => 3,
            _ => 1,
        }
    }

    pub(crate) fn spec(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Spec {
            path: path.into(),
            message: message.into(),
        }
    }
}
