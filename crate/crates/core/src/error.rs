use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point outside the domain of {model}: {reason}")]
    Domain { model: String, reason: String },

    #[error("degenerate parameter: {0}")]
    Degenerate(String),

    #[error("invalid usage: {0}")]
    Usage(String),

    #[error("operation not supported by {model}: {op}")]
    Unsupported { model: String, op: String },

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("malformed dendrogram: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn domain(model: &str, reason: impl Into<String>) -> Self {
        Error::Domain {
            model: model.to_string(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
