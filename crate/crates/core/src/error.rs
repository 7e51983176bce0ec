use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("falsification: {0}")]
    Falsification(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("support window did not close: {0}")]
    Window(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub fn falsification(msg: impl Into<String>) -> Self {
        Error::Falsification(msg.into())
    }
}
