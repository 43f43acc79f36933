use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("capacity exceeded: {n} obligors exceeds the exact-path limit of {limit}; use the Monte Carlo engine")]
    Capacity { n: usize, limit: usize },

    #[error("unsupported mode: {0}")]
    Unsupported(String),

    #[error("degenerate model: {0}")]
    Degenerate(String),

    #[error("infeasible scenario: truncation box acceptance rate {rate:.3e} is below {min:.0e}")]
    InfeasibleScenario { rate: f64, min: f64 },

    #[error("invalid portfolio: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
