use thiserror::Error;

pub type Result<T> = std::result::Result<T, UqError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UqError {
    #[error("class scale needs at least 2 classes, got {0}")]
    ScaleTooSmall(usize),

    #[error("probability entry {index} is {value}, expected a finite value in [0, 1]")]
    InvalidProbability { index: usize, value: f64 },

    #[error("probabilities sum to {sum}, expected 1 within {tolerance:e}")]
    NotNormalized { sum: f64, tolerance: f64 },

    #[error("ensemble has no members")]
    EmptyEnsemble,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range {lo}..={hi}")]
    IndexOutOfRange { index: usize, lo: usize, hi: usize },

    #[error("logarithm base must be finite and > 1, got {0}")]
    InvalidLogBase(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("record has no uncertainty values for measure {0}")]
    MissingMeasure(String),

    #[error("prediction-rejection ratio undefined: oracle area is {ar_orc} (no errors to reject)")]
    UndefinedPrr { ar_orc: f64 },
}
