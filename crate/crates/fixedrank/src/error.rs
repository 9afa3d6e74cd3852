use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Matrix/vector dimensions do not match the operator or each other.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// The requested operation is not defined for this operator variant.
    #[error("unsupported operator: {0}")]
    UnsupportedOperator(String),

    /// The operation is defined but not available for these inputs.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A bisection bracket precondition failed.
    #[error("bracket error: {0}")]
    Bracket(String),

    /// A dataset file failed validation on load.
    #[error("ingestion error: {0}")]
    Ingestion(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable tag for the error kind, used by the CLI's
    /// JSON error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::UnsupportedOperator(_) => "unsupported_operator",
            Error::Unsupported(_) => "unsupported",
            Error::Bracket(_) => "bracket",
            Error::Ingestion(_) => "ingestion",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
