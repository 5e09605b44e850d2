use thiserror::Error as ThisError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, ThisError)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("duplicate point at index {0}")]
    DuplicatePoint(usize),
    #[error("cannot parse rational {0:?}")]
    ParseRational(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    /// A search gave up; `partial` is the best bound proven before stopping.
    #[error("budget exceeded: {what} (partial bound {partial:?})")]
    Budget { what: String, partial: Option<u64> },
}
