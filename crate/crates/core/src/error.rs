use thiserror::Error;

/// Errors produced by the analysis library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is singular to tolerance (pivot magnitude {pivot:e})")]
    Singular { pivot: f64 },

    #[error("matrix is not symmetric (asymmetry {asymmetry:e})")]
    NonSymmetric { asymmetry: f64 },

    #[error("matrix dimension {0} exceeds the supported maximum of 64")]
    TooLarge(usize),

    #[error(
        "newton iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("points are affinely dependent")]
    AffinelyDependent,

    #[error("point cloud is not in general position: subset {subset:?} is affinely dependent")]
    GeneralPosition { subset: Vec<usize> },

    #[error("point cloud has {got} points, more than the limit of {limit}")]
    CloudTooLarge { got: usize, limit: usize },

    #[error("distance oracle failure: {reason} ({starts} starts, {converged} converged)")]
    OracleFailure {
        reason: String,
        starts: usize,
        converged: usize,
    },

    #[error("query point lies on the target set (distance {0:e})")]
    OnTarget(f64),

    #[error("point is not on the surface (|p(x)| = {0:e})")]
    NotOnSurface(f64),

    #[error("singular point of the surface (|grad p(x)| = {0:e})")]
    SingularSurfacePoint(f64),

    #[error("focal degeneracy: |1 - r*kappa| = {0:e}")]
    Focal(f64),

    #[error("point is not critical")]
    NotCritical,

    #[error("index {k} out of range 0..={max}")]
    IndexOutOfRange { k: usize, max: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("missing input: {0}")]
    Missing(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
