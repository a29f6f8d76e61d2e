use std::io;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A well-formed input whose structure is invalid (dangling head, cycle).
    #[error("structural error: {0}")]
    Structure(String),

    #[error("usage error: {0}")]
    Usage(String),

    /// A query whose inputs do not satisfy the operation's preconditions,
    /// such as an out-of-vocabulary term.
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("cannot load index: {0}")]
    Load(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn usage(message: impl Into<String>) -> Self {
        Error::Usage(message.into())
    }

    pub(crate) fn precondition(message: impl Into<String>) -> Self {
        Error::Precondition(message.into())
    }
}
