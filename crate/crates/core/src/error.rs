use thiserror::Error;

/// Errors surfaced by the library.
///
/// Numerical *verdicts* (infeasible, not sufficient, certificate found, …)
/// are ordinary return values, not errors; `Error` is reserved for contract
/// violations: malformed inputs, singular systems where nonsingularity was
/// required, iteration caps that indicate a broken assumption, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("principal submatrix for {index_set:?} is numerically singular (|det| = {det:.3e} below threshold {threshold:.3e})")]
    SingularPrincipalSubmatrix {
        index_set: Vec<usize>,
        det: f64,
        threshold: f64,
    },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("LP pivot cap {cap} exceeded")]
    PivotCap { cap: usize },

    #[error("ellipsoid shape matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("ellipsoid collapsed while clipping to the box (cap {cap} cuts, center still outside)")]
    EllipsoidCollapsed { cap: usize },

    #[error("iteration cap {cap} exceeded in {what}")]
    IterationCap { what: String, cap: usize },

    #[error("contract breach: {0}")]
    ContractBreach(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
