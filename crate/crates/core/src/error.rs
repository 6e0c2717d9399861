//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by dataset handling, model fitting, calibration and IO.
#[derive(Error, Debug)]
pub enum CrcError {
    #[error("shape mismatch: {context} (expected {expected}, got {got})")]
    ShapeMismatch {
        context: String,
        expected: String,
        got: String,
    },

    #[error("non-finite value {value} at (sample {sample}, step {step}, node {node}) in {tensor}")]
    NonFinite {
        tensor: String,
        sample: usize,
        step: usize,
        node: usize,
        value: f64,
    },

    #[error("target tensor is required for this operation but absent")]
    MissingTarget,

    #[error("parse error at row {row}, column {column}: {message}")]
    ParseError {
        row: usize,
        column: String,
        message: String,
    },

    #[error("insufficient rows: {message}")]
    InsufficientRows { message: String },

    #[error("unstable synthetic system: spectral radius {rho} >= 1")]
    UnstableSystem { rho: f64 },

    #[error("singular system: {context}")]
    SingularSystem { context: String },

    #[error("non-finite loss at epoch {epoch} (value {value}); trace kept up to failure")]
    NonFiniteLoss { epoch: usize, value: f64 },

    #[error("validation split is empty")]
    EmptyValidation,

    #[error("config error: {0}")]
    Config(String),

    #[error("stale input: {path} (recorded hash {recorded}, actual {actual})")]
    StaleInput {
        path: String,
        recorded: String,
        actual: String,
    },

    #[error("missing stage output: {0}")]
    MissingStage(String),

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CrcError>;

impl CrcError {
    pub fn shape(context: impl Into<String>, expected: impl Into<String>, got: impl Into<String>) -> Self {
        CrcError::ShapeMismatch {
            context: context.into(),
            expected: expected.into(),
            got: got.into(),
        }
    }
}
