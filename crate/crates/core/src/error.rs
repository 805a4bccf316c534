use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("shooting failed: {0}")]
    Shooting(String),

    #[error("tail fit failed: {0}")]
    TailFit(String),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("numerical overflow: {0}")]
    Overflow(String),

    #[error("Monte Carlo estimate unreliable: {0}")]
    Unreliable(String),

    #[error("no interior maximum: {0}")]
    NoInteriorMax(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
