//! Crate-wide error type.
//!
//! Library functions return [`Result`] with a single [`Error`] enum so callers
//! can classify failures uniformly: malformed files, invalid values or shapes,
//! missing data, and numerical breakdowns are distinct variants rather than
//! stringly-typed causes.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Unified error for data, signal-processing, and model operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed file header or payload structure.
    #[error("format error: {0}")]
    Format(String),

    /// Payload shorter than the header promises.
    #[error("truncated payload: expected {expected} values, found {found}")]
    Truncated { expected: usize, found: usize },

    /// A value or combination of values violates a documented invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// Array dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Epoch windows fall outside the recording for the listed trials.
    #[error("epoch window out of range for trial(s) {trials:?}")]
    EpochOutOfRange { trials: Vec<usize> },

    /// Resampling ratio is not an integer factor.
    #[error("unsupported rate conversion: {from_hz} Hz -> {to_hz} Hz is not an integer downsampling factor")]
    UnsupportedRate { from_hz: f64, to_hz: f64 },

    /// Not enough samples or trials to carry out the operation.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A numerical routine failed or produced non-finite values.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A channel has no position in the montage.
    #[error("channel '{0}' has no montage position")]
    MontageMissing(String),

    /// Invalid argument to an operation.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
