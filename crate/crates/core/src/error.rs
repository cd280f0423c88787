use thiserror::Error;

/// Crate-wide error type. Variants are grouped by how a caller should react:
/// bad input data, an exhausted work budget, an iteration that failed to
/// settle, or a broken internal invariant.
#[derive(Error, Debug, Clone)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("depth {requested} unavailable: backing only realizes depth {available}")]
    DepthUnavailable { requested: u32, available: u32 },

    #[error("dissection ratio undefined for the empty word")]
    UndefinedRatio,

    #[error("hulls overlap or touch: [{0}] vs [{1}]")]
    Overlap(String, String),

    #[error("missing or insufficient lower-bound certificate: {0}")]
    Certificate(String),

    #[error("degenerate attractor: all fixed points coincide")]
    DegenerateAttractor,

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("no convergence after {0} iterations")]
    NonConvergence(usize),

    #[error("grid resolution mismatch: {0} vs {1}")]
    ResolutionMismatch(f64, f64),

    #[error("distance undefined for an empty set")]
    EmptySet,

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_)
            | Error::DepthUnavailable { .. }
            | Error::UndefinedRatio
            | Error::Overlap(..)
            | Error::Certificate(_)
            | Error::DegenerateAttractor
            | Error::ResolutionMismatch(..)
            | Error::EmptySet => 2,
            Error::Budget(_) => 3,
            Error::NonConvergence(_) => 4,
            Error::Internal(_) => 5,
        }
    }
}
