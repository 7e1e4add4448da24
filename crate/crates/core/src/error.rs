use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("invalid key material")]
    InvalidKey,
    #[error("entropy source unavailable")]
    EntropyUnavailable,
    #[error("invalid identifier: {0}")]
    InvalidId(&'static str),
    #[error("duplicate entry")]
    Duplicate,
}
