//! Error type shared by the core modules.

use thiserror::Error;

/// Errors surfaced by state-space, path, statistic and solver operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Vector or operator dimensions do not line up.
    #[error("dimension mismatch: {left} vs {right} in {context}")]
    DimensionMismatch {
        left: usize,
        right: usize,
        context: &'static str,
    },
    /// A vector required to be normalised is not.
    #[error("state not normalised: |<v|v>| deviates from 1 by {deviation:e}")]
    NotNormalized { deviation: f64 },
    /// An operator required to be Hermitian is not.
    #[error("operator not Hermitian: max |H - H^dagger| entry {deviation:e}")]
    NotHermitian { deviation: f64 },
    /// A factorization does not multiply out to the ambient dimension.
    #[error("tensor factorization {product} does not match ambient dimension {ambient}")]
    BadFactorization { product: usize, ambient: usize },
    /// Paths need at least three nodes for the second-order stencils.
    #[error("path has {got} nodes, need at least {need}")]
    TooFewNodes { got: usize, need: usize },
    /// Node times must be strictly increasing.
    #[error("path times not strictly increasing at index {index}")]
    NonMonotoneTimes { index: usize },
    /// The phase freedom cannot cancel the parallel residual coefficient.
    #[error("path violates the unitarity contract: norm drift {drift:e} not removable by a phase")]
    NonUnitaryPath { drift: f64 },
    /// Overlap with the reference fell below the cutoff; the path statistic diverges.
    #[error("orthogonal excursion: path overlap {overlap:e} below cutoff {cutoff:e}")]
    OrthogonalExcursion { overlap: f64, cutoff: f64 },
    /// A parameter is outside its documented domain.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    /// An iterative solver failed to converge.
    #[error("no convergence in {what} after {iterations} iterations: {detail}")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        detail: String,
    },
    /// A time integration left its stability envelope.
    #[error("numerical instability in {what}: {detail}")]
    Unstable { what: &'static str, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
