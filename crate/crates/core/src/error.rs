use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A configuration value violates its invariant.
    #[error("invalid configuration: `{field}` {reason}")]
    Config { field: &'static str, reason: String },

    /// An argument lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The adaptive integrator could not meet its tolerance.
    #[error("integrator failed at t = {time:.6e} s: {reason}")]
    Numerical { time: f64, reason: String },

    /// An ion has no population left in the qubit subspace, so the
    /// normalized readout is undefined.
    #[error("degenerate readout: ion {ion} has zero qubit population")]
    DegenerateReadout { ion: usize },

    /// A matrix does not satisfy the density matrix invariants.
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }
}
