//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: {left} vs {right}")]
    DimensionMismatch {
        context: &'static str,
        left: String,
        right: String,
    },

    #[error("basis has no numerically independent columns")]
    EmptyBasis,

    #[error("rank-deficient system: {0}")]
    RankDeficient(&'static str),

    #[error("degenerate channel: zero norm")]
    DegenerateChannel,

    #[error("operation unavailable: {0}")]
    Unavailable(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bad magic bytes: expected {expected:?}")]
    BadMagic { expected: &'static str },

    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { expected: u8, found: u8 },

    #[error("file truncated: {0}")]
    Truncated(&'static str),

    #[error("antenna count mismatch: file has {found}, expected {expected}")]
    AntennaMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(context: &'static str, left: impl ToString, right: impl ToString) -> Self {
        Error::DimensionMismatch {
            context,
            left: left.to_string(),
            right: right.to_string(),
        }
    }
}
