//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by the polarization pipeline.
#[derive(Debug, Error)]
pub enum PolarError {
    /// Mosaic or image dimensions are not usable (e.g. odd mosaic size).
    #[error("invalid dimensions: {0}")]
    Dimension(String),

    /// Two images or stacks that must share a shape do not.
    #[error("shape mismatch: expected {expected_width}x{expected_height}, got {width}x{height}")]
    ShapeMismatch {
        expected_width: usize,
        expected_height: usize,
        width: usize,
        height: usize,
    },

    /// A sample value falls outside the representable range.
    #[error("value {value} out of range [0, {max}]")]
    ValueOutOfRange { value: f64, max: f64 },

    /// An operation that requires linear raw data was given gamma-encoded
    /// data (or vice versa).
    #[error("domain mismatch: operation requires {required} data, got {actual}")]
    DomainMismatch {
        required: &'static str,
        actual: &'static str,
    },

    /// A scalar parameter violates its documented range.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Input image is too small for the requested multi-scale operation.
    #[error("image {width}x{height} too small: both dimensions must be at least {min}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min: usize,
    },

    /// An optimizer stage produced a non-finite objective.
    #[error("solver failure in {stage} at iteration {iteration}: objective = {objective}")]
    Solver {
        stage: &'static str,
        iteration: usize,
        objective: f64,
    },

    /// A file does not conform to the expected on-disk format.
    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl PolarError {
    pub(crate) fn parameter(name: &'static str, reason: impl Into<String>) -> Self {
        PolarError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, PolarError>;
