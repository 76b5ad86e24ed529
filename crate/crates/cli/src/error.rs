use std::path::PathBuf;

use gardenhose::compose::ComposeError;
use gardenhose::exact::ExactError;
use gardenhose::groups::GroupError;
use gardenhose::search::SearchError;
use gardenhose::{FlowError, MatrixError, SolutionError};
use thiserror::Error;

/// Process exit statuses. Clap itself exits with 2 on usage errors.
pub mod exit {
    pub const OK: u8 = 0;
    pub const INTERNAL: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const PARSE: u8 = 3;
    pub const INVALID: u8 = 4;
    pub const FAILED: u8 = 5;
    pub const CAPACITY: u8 = 6;
    pub const IO: u8 = 7;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Failed(String),
    #[error("{0}")]
    Capacity(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Parse(_) => exit::PARSE,
            CliError::Invalid(_) => exit::INVALID,
            CliError::Failed(_) => exit::FAILED,
            CliError::Capacity(_) => exit::CAPACITY,
            CliError::Io { .. } => exit::IO,
            CliError::Internal(_) => exit::INTERNAL,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::Parse { .. } => CliError::Parse(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<MatrixError> for CliError {
    fn from(e: MatrixError) -> Self {
        match e {
            MatrixError::Range(_) => CliError::Invalid(e.to_string()),
            MatrixError::Capacity { .. } => CliError::Capacity(e.to_string()),
            MatrixError::Flow(f) => f.into(),
            MatrixError::Format { .. } => CliError::Parse(e.to_string()),
        }
    }
}

impl From<SolutionError> for CliError {
    fn from(e: SolutionError) -> Self {
        match e {
            SolutionError::Flow(f) => f.into(),
            SolutionError::NotVerified(_) => CliError::Failed(e.to_string()),
            SolutionError::OddPipeCount(_) => CliError::Invalid(e.to_string()),
            SolutionError::Format { .. } => CliError::Parse(e.to_string()),
        }
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::InvalidParams(_) => CliError::Invalid(e.to_string()),
            SearchError::Matrix(m) => m.into(),
            SearchError::Inconsistent(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<ComposeError> for CliError {
    fn from(e: ComposeError) -> Self {
        match e {
            ComposeError::SizeCap { .. } => CliError::Capacity(e.to_string()),
            ComposeError::NotVerified(_) => CliError::Failed(e.to_string()),
            ComposeError::Flow(f) => f.into(),
            ComposeError::ZeroBlocks | ComposeError::Domain(_) => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<ExactError> for CliError {
    fn from(e: ExactError) -> Self {
        CliError::Capacity(e.to_string())
    }
}

impl From<GroupError> for CliError {
    fn from(e: GroupError) -> Self {
        use GroupError::*;
        match e {
            Parse { .. } | File { .. } | RepeatedPoint(_) | PointOutOfRange { .. } | NotBijection => {
                CliError::Parse(e.to_string())
            }
            Degree(_) | DegreeMismatch { .. } | Range(_) | InvalidBase(_) => CliError::Invalid(e.to_string()),
            Flow(f) => f.into(),
            OrderExceedsCap { .. } | WeakCheckTooLarge { .. } => CliError::Capacity(e.to_string()),
            NotGH(_) => CliError::Failed(e.to_string()),
        }
    }
}
