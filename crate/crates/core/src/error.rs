use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("data inconsistency: {0}")]
    DataInconsistency(String),

    #[error("generator failed: {0}")]
    Generator(String),

    #[error("size guard exceeded: {0}")]
    TooLarge(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Domain(_) => "domain",
            Error::DataInconsistency(_) => "data_inconsistency",
            Error::Generator(_) => "generator",
            Error::TooLarge(_) => "too_large",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
        }
    }
}
