use num_complex::Complex64;

use crate::dsl::DslError;

/// Errors produced by every module of the crate.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("matrix is singular at pivot {pivot}")]
    SingularMatrix { pivot: usize },
    #[error("eigenvalue iteration did not converge: {converged} of {order} eigenvalues found")]
    NoConvergence {
        order: usize,
        converged: usize,
        /// Eigenvalues that did deflate before the sweep limit was hit.
        partial: Vec<Complex64>,
    },
    #[error("symbol evaluated at declared singular point {x:?}")]
    Domain { x: Vec<f64> },
    #[error("symbol value is singular at {x:?}")]
    SingularSymbol { x: Vec<f64> },
    #[error("matrix order {order} exceeds the dense limit {max} (set TOEPSPEC_MAX_ORDER to raise it)")]
    ResourceLimit { order: usize, max: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("GMRES stagnated after {iterations} iterations (Arnoldi norm underflow)")]
    Stagnation { iterations: usize },
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("malformed document: {0}")]
    Format(String),
}

impl Error {
    /// True for failures of the numerical kernels (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::SingularMatrix { .. }
                | Error::NoConvergence { .. }
                | Error::SingularSymbol { .. }
                | Error::Stagnation { .. }
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
