use thiserror::Error;

/// Errors produced by the waveform design library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    /// `|X + ξ|` vanished at some entry, so elementwise normalization is undefined.
    #[error("singular retraction at entry ({row}, {col}): |x + xi| = {modulus:e}")]
    SingularRetraction { row: usize, col: usize, modulus: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
