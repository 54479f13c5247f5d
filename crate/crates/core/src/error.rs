use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid value for `{field}`: {reason}")]
    InvalidSpec { field: String, reason: String },

    #[error("unsupported representation: {0}")]
    Unsupported(String),

    #[error("numeric failure: {message} (value {value}, residual {residual})")]
    Numeric {
        message: String,
        value: f64,
        residual: f64,
    },

    #[error("invalid configuration for `{field}`: {reason}")]
    Config { field: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn spec(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidSpec {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Name of the offending field for spec and config errors.
    pub fn field(&self) -> Option<&str> {
        match self {
            Error::InvalidSpec { field, .. } | Error::Config { field, .. } => Some(field),
            _ => None,
        }
    }
}
