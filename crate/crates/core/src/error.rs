//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated a documented precondition (dimension mismatch,
    /// out-of-range label, empty input, bad configuration field, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A computation produced a non-finite value.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A binary payload did not match the expected on-disk format.
    #[error("format error: expected {expected}, got {actual}")]
    Format { expected: String, actual: String },

    /// Two inputs that must agree (e.g. image and label counts) do not.
    #[error("inconsistency: {0}")]
    Consistency(String),

    /// A run completed but its diagnostics indicate the result is unusable.
    #[error("diagnostic failure: {0}")]
    Diagnostic(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
