use std::path::PathBuf;

use thiserror::Error;

use crate::morphology::InvalidBody;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("input length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("genome graph contains a cycle")]
    CycleDetected,

    #[error("grid dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("body cannot be simulated: {0}")]
    InvalidBody(InvalidBody),

    #[error("simulation produced a non-finite value at substep {substep} (point {point})")]
    NonFinite { substep: u64, point: usize },

    #[error("unknown task id `{0}`")]
    UnknownTask(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("corrupt archive {path}: {reason}")]
    CorruptArchive { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
