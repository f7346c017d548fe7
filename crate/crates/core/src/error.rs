use thiserror::Error;

/// Errors raised by the rate formulas, the ADMM engine and the problem
/// instances.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar argument fell outside the domain of the formula it feeds.
    #[error("{name} = {value} is out of domain: {requirement}")]
    Domain {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    /// Vector or matrix shapes do not agree with the problem dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An inner subproblem solver gave up before reaching its tolerance.
    #[error("subproblem solver did not converge in {iterations} iterations (gradient norm {gradient_norm:e})")]
    Solver {
        iterations: usize,
        gradient_norm: f64,
    },

    /// Not enough usable data to estimate a quantity (rate, fixed point,
    /// curvature).
    #[error("estimation failed: {0}")]
    Estimation(String),

    /// Malformed dataset input.
    #[error("dataset: {0}")]
    Dataset(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(name: &'static str, value: f64, requirement: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        requirement,
    }
}
