use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("universe must contain at least one alternative")]
    EmptyUniverse,

    #[error("expected {expected} alternative labels, got {got}")]
    LabelCount { expected: usize, got: usize },

    #[error("alternative {id} appears more than once in the order")]
    DuplicateItem { id: usize },

    #[error("alternative {id} is outside 1..={m}")]
    ItemOutOfRange { id: usize, m: usize },

    #[error("empty order is not a valid record")]
    EmptyOrder,

    #[error("length {k} exceeds universe size {m}")]
    LengthOutOfRange { k: usize, m: usize },

    #[error("refusing to enumerate partial orders for m={m} (cap is {cap})")]
    EnumerationCap { m: usize, cap: usize },

    #[error("integer overflow computing {0}")]
    Overflow(&'static str),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("covariates required: {0}")]
    MissingCovariates(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("record {index} has zero probability under the model")]
    ImpossibleRecord { index: usize },

    #[error("objective diverged at epoch {epoch}")]
    Diverged { epoch: usize, trace: Vec<f64> },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("unsupported format: {0}")]
    Unsupported(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("support mismatch: {0} vs {1}")]
    SupportMismatch(usize, usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
