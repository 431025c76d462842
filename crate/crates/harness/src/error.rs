//! Harness errors, mapped onto the CLI exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// 0 success, 2 config error, 3 numeric failure, 4 i/o error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Numeric(_) => 3,
            Error::Io(_) => 4,
        }
    }
}

impl From<beamlab_core::Error> for Error {
    fn from(e: beamlab_core::Error) -> Self {
        use beamlab_core::Error as E;
        match e {
            E::InvalidArgument(_) | E::DimensionMismatch { .. } => Error::Config(e.to_string()),
            E::Io(_)
            | E::BadMagic { .. }
            | E::VersionMismatch { .. }
            | E::Truncated(_)
            | E::AntennaMismatch { .. } => Error::Io(e.to_string()),
            _ => Error::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
