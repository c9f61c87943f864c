use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid CSR structure: {0}")]
    InvalidCsr(String),

    #[error(
        "power iteration did not converge in {iterations} iterations (last estimate {estimate})"
    )]
    NormNotConverged { iterations: usize, estimate: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible point: {0}")]
    Infeasible(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite iterate at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("linesearch exceeded {cap} backtracks at iteration {iteration}")]
    LinesearchExhausted { iteration: usize, cap: usize },
}
