use thiserror::Error;

/// Everything that can go wrong in the library.
///
/// `Precondition` and `RefineNeeded` are kept apart because the CLI maps them to
/// different exit codes.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid dendrite: {0}")]
    InvalidDendrite(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("invalid subdendrite: {0}")]
    InvalidSubdendrite(String),
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("subdendrites live on different ambient spaces")]
    AmbientMismatch,
    #[error("point is not in the subdendrite")]
    NotInSubdendrite,
    #[error("precondition failed{}: {message}", condition.as_ref().map(|c| format!(" (condition {c})")).unwrap_or_default())]
    Precondition {
        condition: Option<String>,
        message: String,
    },
    #[error("refinement needed: {0}")]
    RefineNeeded(String),
    #[error("internal consistency: {0}")]
    Inconsistent(String),
}

impl Error {
    pub fn precondition(message: impl Into<String>) -> Self {
        Error::Precondition {
            condition: None,
            message: message.into(),
        }
    }

    pub fn condition(index: &str, message: impl Into<String>) -> Self {
        Error::Precondition {
            condition: Some(index.to_string()),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
