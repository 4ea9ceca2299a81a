use thiserror::Error;

/// Every fallible operation in the crate reports one of these.
///
/// The variants are grouped so the CLI can map them onto exit codes:
/// configuration problems, numerical failures (including fitness gates and
/// degenerate phases), and everything else.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("fitness check failed: {0}")]
    Fitness(String),

    #[error("degenerate phase: d = {0:e}")]
    DegeneratePhase(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
