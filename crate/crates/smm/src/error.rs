//! Error taxonomy shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed chain file or unparseable numeric input.
    #[error("parse error: {0}")]
    Parse(String),

    /// Structurally well-formed input that violates a model invariant.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A direction vector too small to normalize (e.g. u = 0, or an
    /// unreachable redundancy direction).
    #[error("degenerate direction: norm below threshold")]
    DegenerateDirection,

    /// The task Jacobian kernel is not one-dimensional at this configuration.
    #[error("rank-deficient task Jacobian (sigma_min={sigma_min:.3e}, sigma_second={sigma_second:.3e})")]
    RankDeficient { sigma_min: f64, sigma_second: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The initial configuration of a trace is itself singular.
    #[error("singular start configuration: {0}")]
    SingularStart(#[source] Box<Error>),

    /// The initial configuration does not solve the task.
    #[error("seed does not solve the task (residual {residual:.3e})")]
    InvalidSeed { residual: f64 },

    #[error("IK did not converge after {iters} iterations (residual {residual:.3e})")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("all {attempts} IK restarts failed to converge")]
    AllFailed { attempts: usize },

    /// Elbow toggling attempted on a straightened or folded 2R subchain,
    /// where both analytic branches coincide.
    #[error("degenerate toggle: 2R subchain at full extension or fold")]
    DegenerateToggle,

    #[error("empty trace")]
    EmptyTrace,

    /// A Runge-Kutta stage evaluation failed; `stage` is zero-based.
    #[error("integration stage {stage} failed: {source}")]
    Stage { stage: usize, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for the error classes that terminate a trace mid-integration
    /// (as opposed to caller mistakes, which propagate).
    pub fn is_singular(&self) -> bool {
        match self {
            Error::RankDeficient { .. } | Error::DegenerateDirection => true,
            Error::Stage { source, .. } => source.is_singular(),
            _ => false,
        }
    }
}
