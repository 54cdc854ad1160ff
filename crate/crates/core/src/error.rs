use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate subgradient: the point coincides with the target")]
    DegenerateSubgradient,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no negative instance found in the search region")]
    SearchExhausted,

    #[error("oracle inconsistency: {0}")]
    Inconsistent(String),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("empty direction set")]
    EmptyDirectionSet,

    #[error("degenerate body: {0}")]
    DegenerateBody(String),

    #[error("closed form not available for this classifier")]
    NotAvailable,

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
