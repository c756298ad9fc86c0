use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Model parameters violate a builder precondition.
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    /// A matrix file could not be ingested.
    #[error("ingestion error in {path} (line {line}): {msg}")]
    Ingestion {
        path: String,
        line: usize,
        msg: String,
    },

    /// The dense eigensolver did not converge or produced non-finite output.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Left/right eigenvalue pairing could not be completed.
    #[error("left/right pairing failed: distance {distance:.3e} exceeds limit {limit:.3e}")]
    PairingFailure { distance: f64, limit: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A computed quantity left its mathematically guaranteed range.
    #[error("internal consistency violation: {0}")]
    Inconsistent(String),

    /// Fewer than two eigenvalues below the zero-mode tolerance.
    #[error("no edge modes: {0}")]
    NoEdgeModes(String),

    /// More than two eigenvalues below the zero-mode tolerance.
    #[error("ambiguous zero modes: {0}")]
    AmbiguousModes(String),

    /// Parameters outside the regime where an analytic construction exists.
    #[error("invalid regime: {0}")]
    InvalidRegime(String),

    /// The input matrix does not have the structure the operation assumes.
    #[error("structure error: {0}")]
    Structure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attach the failing grid point to an error propagated out of a sweep.
    pub fn at_grid_point(self, param: f64) -> Error {
        match self {
            Error::Numerical(msg) => Error::Numerical(format!("at grid point {param}: {msg}")),
            Error::InvalidSpec(msg) => Error::InvalidSpec(format!("at grid point {param}: {msg}")),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
