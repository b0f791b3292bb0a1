use thiserror::Error;

/// Errors surfaced by the engine.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("unknown builtin name `{0}`")]
    UnknownName(String),

    #[error("universe mismatch: `{left}` vs `{right}`")]
    UniverseMismatch { left: String, right: String },

    #[error("series has a nonzero constant term; exp/log undefined")]
    NonzeroConstantTerm,

    #[error("series has a weight-zero nonconstant term; exp/log would not terminate")]
    ZeroWeightTerm,

    #[error("truncation caps exceeded in {op}: {detail}")]
    CapsExceeded { op: String, detail: String },

    #[error("inconsistent tangency profile: {0}")]
    InvalidProfile(String),

    #[error("expected an integer count, got {0}")]
    NonIntegerCount(String),

    #[error("element is not homogeneous")]
    NotHomogeneous,

    #[error("invalid ring data: {0}")]
    InvalidRing(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, EngineError>;
