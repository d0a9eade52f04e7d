use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input data.
    #[error("invalid input: {0}")]
    Input(String),

    /// Geometrically degenerate input (collinear points, zero-volume simplices).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A size guard refused the request.
    #[error("input too large: {0}")]
    TooLarge(String),

    /// An inconsistent experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A statistic is undefined for the supplied data.
    #[error("undefined: {0}")]
    Undefined(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("toml error: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
