use thiserror::Error;

/// Errors raised by the simulator and its experiment pipelines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated an operation precondition.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A constructed object failed an invariant check.
    #[error("validation failed: {0}")]
    Validation(String),
    /// Inconsistent configuration (topology, dimensions, hyperparameters).
    #[error("configuration error: {0}")]
    Config(String),
    /// A linear solver could not produce a solution.
    #[error("solver error: {0}")]
    Solver(String),
    /// Non-finite values, divergence guards, degenerate statistics.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// The Hamiltonian spectrum has no gap above the degeneracy tolerance.
    #[error("spectrum is fully degenerate: no gap above tolerance {0:e}")]
    NoGap(f64),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
