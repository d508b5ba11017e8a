use thiserror::Error;

use crate::walk_model::ValidationReport;

/// Errors raised by the analytic and oracle routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The walk description violates one or more invariants.
    #[error("invalid walk specification: {0}")]
    Invalid(ValidationReport),

    /// The characteristic quadratic has (numerically) coincident roots.
    #[error("degenerate characteristic roots (discriminant {discriminant:e})")]
    DegenerateRoots { discriminant: f64 },

    /// A documented precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The transient block is singular: absorption is not certain.
    #[error("absorption is not certain from the requested start (singular transient system)")]
    NotAbsorbing,

    /// The requested parameter pattern is outside the cases with a closed form.
    #[error("unsupported case: {0}")]
    UnsupportedCase(String),

    /// A simulation would never terminate under the given policy.
    #[error("walk cannot terminate: no absorbing state and no escape policy")]
    NonTerminating,

    /// Two routes that must agree did not.
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),

    /// An oracle window does not contain the start state.
    #[error("window [{lo}, {hi}] does not contain start state {start}")]
    WindowTooSmall { lo: i64, hi: i64, start: i64 },
}

pub type Result<T> = std::result::Result<T, Error>;
