use thiserror::Error;

/// Errors raised by the library. Each variant carries a human-readable detail.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid surface model: {0}")]
    InvalidModel(String),
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("degenerate parameter: {0}")]
    Degenerate(String),
    #[error("no threshold found: {0}")]
    NoThreshold(String),
    #[error("no sign change: {0}")]
    NoSignChange(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("parameter window violated: {0}")]
    Window(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("no declared HN data: {0}")]
    Undeclared(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// Stable machine-readable code for error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidModel(_) => "invalid_model",
            Error::Domain(_) => "domain",
            Error::Degenerate(_) => "degenerate",
            Error::NoThreshold(_) => "no_threshold",
            Error::NoSignChange(_) => "no_sign_change",
            Error::Integration(_) => "integration",
            Error::Window(_) => "window",
            Error::Inconclusive(_) => "inconclusive",
            Error::Undeclared(_) => "undeclared",
            Error::Config(_) => "config",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
