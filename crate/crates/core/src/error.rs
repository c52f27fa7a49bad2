use thiserror::Error;

/// Errors shared by every module of the laboratory.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An element key does not fit the group it is used with.
    #[error("encoding error: {0}")]
    Encoding(String),
    /// A declared object (group, system, cocycle, box) is malformed.
    #[error("validation error: {0}")]
    Validation(String),
    /// The operation is not defined for this kind of input.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A configured size bound was hit. `completed` is the last step that
    /// finished before the guard tripped, when meaningful.
    #[error("resource guard: {what} (limit {limit}, last completed step {completed:?})")]
    Resource {
        what: String,
        limit: u64,
        completed: Option<usize>,
    },
    /// Two computation paths that must agree did not.
    #[error("internal consistency error: {0}")]
    Consistency(String),
    /// A quantity needed as a denominator vanished.
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn resource(what: impl Into<String>, limit: u64, completed: Option<usize>) -> Self {
        Error::Resource {
            what: what.into(),
            limit,
            completed,
        }
    }
}
