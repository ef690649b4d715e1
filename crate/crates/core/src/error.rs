use thiserror::Error;

/// Errors raised while constructing or operating on the library's values.
#[derive(Debug, Error)]
pub enum Error {
    /// A structural invariant of an input value does not hold.
    #[error("invariant `{name}` violated: {detail}")]
    Invariant { name: &'static str, detail: String },

    #[error("unknown element `{0}`")]
    UnknownElement(String),

    #[error("bound exceeded: {what} = {value} exceeds limit {limit}")]
    BoundExceeded {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    /// An operation's hypothesis was checked and found false.
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invariant(name: &'static str, detail: impl Into<String>) -> Self {
        Error::Invariant {
            name,
            detail: detail.into(),
        }
    }

    /// Short machine-readable name of the failure, used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Invariant { name, .. } => name,
            Error::UnknownElement(_) => "unknown_element",
            Error::BoundExceeded { .. } => "bound_exceeded",
            Error::Precondition(_) => "precondition",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Parse { .. } => "parse",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
