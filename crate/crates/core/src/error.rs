use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An input violates a structural precondition (Hermiticity, completeness, ...).
    #[error("contract violation: {0}")]
    Contract(String),
    /// A state family cannot be normalised for the requested parameters.
    #[error("degenerate state: {0}")]
    Degenerate(String),
    /// A numerical routine produced a non-finite or otherwise unusable value.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// Bad user configuration.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
