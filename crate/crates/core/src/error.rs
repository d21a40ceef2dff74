use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degree {degree} exceeds the allowed maximum {max}")]
    DegreeTooLarge { degree: usize, max: usize },

    #[error("distribution supports do not match: {0}")]
    SupportMismatch(String),

    #[error("truncation at tau = {tau} drops all probability mass")]
    DegenerateTruncation { tau: f64 },

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("insufficient samples: need at least {needed}, have {have}")]
    InsufficientSamples { needed: usize, have: usize },

    #[error("zero variance: {0}")]
    ZeroVariance(String),

    #[error("pattern rejected: {0}")]
    InvalidPattern(String),

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
