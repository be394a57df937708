use thiserror::Error;

/// Raised when a dense F2 object would exceed the configured memory cap.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("sizing error: {what} needs {rows} x {cols} bits = {bytes} bytes, cap is {cap} bytes")]
pub struct SizingError {
    pub what: String,
    pub rows: u128,
    pub cols: u128,
    pub bytes: u128,
    pub cap: u64,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),

    #[error("unknown group `{0}`")]
    UnknownGroup(String),

    #[error("group mismatch: {0}")]
    GroupMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("not a cocycle: {0}")]
    NotCocycle(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("degree {degree} exceeds computed length {length}")]
    DegreeOverflow { degree: usize, length: usize },

    #[error("unknown catalog entry {symbol} over {group}")]
    UnknownSymbol { group: String, symbol: String },

    #[error("degree {degree} has {count} monomials, cap is {cap}")]
    MonomialCap { degree: usize, count: usize, cap: usize },

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error(transparent)]
    Sizing(#[from] SizingError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
