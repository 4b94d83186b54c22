//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CascadeError>;

#[derive(Debug, Error)]
pub enum CascadeError {
    #[error("ingest: {0}")]
    Ingest(String),

    #[error("unknown user `{0}`")]
    UnknownUser(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("labels contain a single class; check that both outcomes are present")]
    SingleClass,

    #[error("calibration: {0}")]
    Calibration(String),

    #[error("feature schema mismatch: model expects {expected:#018x}, got {got:#018x}")]
    SchemaMismatch { expected: u64, got: u64 },

    #[error("embedding provider: {0}")]
    Embedding(String),

    #[error("llm endpoint: {0}")]
    Llm(String),

    #[error("key mismatch: {0}")]
    KeyMismatch(String),

    #[error("{have} probabilistic edges exceed the exact-enumeration limit of {limit}; compare against Monte Carlo instead")]
    TooManyEdges { have: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("format: {0}")]
    Format(String),
}
