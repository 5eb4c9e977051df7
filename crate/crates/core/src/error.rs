use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty input")]
    EmptyInput,

    #[error("column '{column}' misaligned at row {row}: {message}")]
    Alignment {
        column: String,
        row: usize,
        message: String,
    },

    #[error("matrix has no gold tags")]
    MissingGold,

    #[error("no candidate tags for token '{0}'")]
    NoCandidates(String),

    #[error("case base is empty")]
    EmptyCaseBase,

    #[error("instance arity {got} does not match schema arity {expected}")]
    Arity { expected: usize, got: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("unsupported variant: {0}")]
    UnsupportedVariant(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
