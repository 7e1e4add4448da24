use thiserror::Error;

/// Failures surfaced by the service API, in-process or over HTTP.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApiError {
    /// Unknown user, device or request (404).
    #[error("not found: {0}")]
    NotFound(String),
    /// Malformed input (422).
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("transport: {0}")]
    Transport(String),
    #[error("internal: {0}")]
    Internal(String),
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {detail}")]
    Parse { path: String, detail: String },
    #[error("{path}: {detail}")]
    Invalid { path: String, detail: String },
}
