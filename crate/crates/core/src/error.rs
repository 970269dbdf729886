use thiserror::Error;

/// Which integrated quantity failed to converge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Energy,
    Pressure,
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Quantity::Energy => f.write_str("energy"),
            Quantity::Pressure => f.write_str("pressure"),
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid material model: {0}")]
    InvalidModel(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("tabulated data rejected: {0}")]
    Ingestion(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The adaptive quadrature ran out of subdivisions. The best estimate is kept.
    #[error("{quantity} quadrature did not converge: best estimate {value:e} with error {error_estimate:e}")]
    Convergence {
        quantity: Quantity,
        value: f64,
        error_estimate: f64,
    },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("diagnostic undefined: {0}")]
    UndefinedDiagnostic(String),

    #[error("inconclusive configuration: threshold {threshold:e} Pa is below the quadrature error {error_estimate:e} Pa")]
    Inconclusive { threshold: f64, error_estimate: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
