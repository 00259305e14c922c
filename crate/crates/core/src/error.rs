use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("invalid design: {0}")]
    InvalidDesign(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("numerical error in {context}: {detail}")]
    Numerical { context: String, detail: String },
    #[error("unknown level id {0}")]
    UnknownLevel(u64),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Prefixes the context of a numerical failure, leaving other kinds as is.
    pub fn with_context(self, prefix: &str) -> Self {
        match self {
            Error::Numerical { context, detail } => Error::Numerical {
                context: alloc::format!("{prefix}: {context}"),
                detail,
            },
            other => other,
        }
    }
}
