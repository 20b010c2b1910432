//! Error types shared by all modules of the crate.

use thiserror::Error;

/// Errors produced by kinematic and singularity computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The base circumradius must be strictly positive.
    #[error("base circumradius must be positive, got {0}")]
    NonPositiveG(f64),

    /// A leg collapsed below the minimum length (platform anchor on top of
    /// its base anchor), so its direction is undefined.
    #[error("leg {leg} is degenerate (length {length:.3e})")]
    DegenerateLeg { leg: usize, length: f64 },

    /// The Jacobian is numerically singular; carries the normalized
    /// determinant that failed the tolerance check.
    #[error("jacobian is singular (normalized determinant {margin:.3e})")]
    SingularJacobian { margin: f64 },

    /// The determinant of the scaled Jacobian failed to reproduce the
    /// expected quadratic dependence on the base radius. This indicates an
    /// implementation bug, not bad input.
    #[error("determinant structure violated (hold-out residual {residual:.3e})")]
    StructureViolation { residual: f64 },

    /// An orientation violates one of the guards of the general-case
    /// position formulas; the caller should fall back to the classifier.
    #[error("degenerate orientation: guard `{guard}` violated")]
    DegenerateOrientation { guard: &'static str },

    /// The orientation (or position) does not satisfy the hypothesis of the
    /// requested factor-oracle case.
    #[error("orientation does not satisfy the `{case}` hypothesis (residual {residual:.3e})")]
    CaseMismatch { case: &'static str, residual: f64 },

    /// Invalid grid or planner parameter.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
