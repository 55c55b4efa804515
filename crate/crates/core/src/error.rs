use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("resolution 2^-{level} is too coarse for r_{k} (need level >= {})", k + 1)]
    ResolutionTooCoarse { k: u32, level: u32 },

    #[error("index {index} outside 1..={ambient}")]
    IndexOutOfRange { index: usize, ambient: usize },

    #[error("size 2^{k} exceeds the supported maximum 2^{max}")]
    SizeOverflow { k: u32, max: u32 },

    #[error("{0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("coefficient vector is zero")]
    ZeroVector,

    #[error("index set is empty")]
    EmptySet,

    #[error("level mismatch: expected at most {expected}, got {actual}")]
    LevelMismatch { expected: u32, actual: u32 },

    #[error("no Walsh function other than w_1 correlates with the index set")]
    NoCorrelator,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("internal inconsistency: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
