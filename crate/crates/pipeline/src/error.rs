use std::path::PathBuf;

use ordunc_core::UqError;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, PipelineError>;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    /// Malformed input with the offending 1-based line (CSV) or row (JSON).
    #[error("{path}: line {line}: {message}")]
    Schema { path: PathBuf, line: u64, message: String },

    #[error("{path}: {message}")]
    Load { path: PathBuf, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("donor has {actual} numeric columns, {required} required")]
    DonorTooNarrow { required: usize, actual: usize },

    #[error("dataset `{dataset}`, fold {fold}: {source}")]
    InFold {
        dataset: String,
        fold: usize,
        #[source]
        source: Box<PipelineError>,
    },

    #[error(transparent)]
    Uq(#[from] UqError),
}

impl PipelineError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PipelineError::Io { path: path.into(), source }
    }

    pub(crate) fn schema(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        PipelineError::Schema { path: path.into(), line, message: message.into() }
    }

    pub(crate) fn load(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        PipelineError::Load { path: path.into(), message: message.into() }
    }

    /// True for errors caused by malformed input rather than degenerate computation.
    pub fn is_input_error(&self) -> bool {
        match self {
            PipelineError::InFold { source, .. } => source.is_input_error(),
            PipelineError::Uq(UqError::UndefinedPrr { .. }) => false,
            _ => true,
        }
    }
}
