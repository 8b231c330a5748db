use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Panel refinement was exhausted before the requested accuracy was met.
    #[error("quadrature did not converge for {what}: estimated error {estimate:.3e}")]
    NonConvergence { what: String, estimate: f64 },

    /// Inputs are individually valid but cannot be combined.
    #[error("usage error: {0}")]
    Usage(String),

    /// A checked inequality or invariant failed; the message names the witness.
    #[error("validation failed: {0}")]
    Validation(String),

    /// The explicit integrator produced a state that is no longer a characteristic function.
    #[error("unstable step: {0}")]
    Instability(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
