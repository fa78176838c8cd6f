//! Error taxonomy shared by all modules.

use thiserror::Error;

/// Diagnostic payload attached to a failed decomposition attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionFailure {
    /// Curve indices accumulated by the iteration when it broke down.
    pub support: Vec<usize>,
    /// What went wrong.
    pub reason: FailureReason,
    /// Whether the failure certifies the class outside the pseudoeffective
    /// cone, or merely outside the algorithm's domain.
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailureReason {
    /// The candidate support has a singular or non-negative-definite Gram
    /// submatrix.
    GramNotNegativeDefinite,
    /// The orthogonality system produced a coefficient that is not
    /// strictly positive.
    NonPositiveCoefficient,
    /// The iteration terminated but the nef part fails a closure test
    /// (square or reference pairing negative); verdict undecided.
    ZPartNotNef,
    /// The class pairs negatively with the reference class.
    NegativeAmplePairing,
    /// Exhaustive enumeration found no valid support subset.
    NoValidSubset,
}

impl std::fmt::Display for FailureReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FailureReason::GramNotNegativeDefinite => {
                write!(f, "support Gram matrix is not negative-definite")
            }
            FailureReason::NonPositiveCoefficient => {
                write!(f, "orthogonality system yields a non-positive coefficient")
            }
            FailureReason::ZPartNotNef => write!(f, "terminal Z-part fails the nef closure tests"),
            FailureReason::NegativeAmplePairing => {
                write!(f, "class pairs negatively with the reference class")
            }
            FailureReason::NoValidSubset => {
                write!(f, "no curve subset yields a valid decomposition")
            }
        }
    }
}

/// Errors produced by the engine.
#[derive(Debug, Error)]
pub enum Error {
    /// The Gram matrix does not have the required signature.
    #[error("signature error: {0}")]
    Signature(String),

    /// A declared curve violates a curve invariant.
    #[error("curve error: {0}")]
    Curve(String),

    /// Malformed input document or literal.
    #[error("parse error: {0}")]
    Parse(String),

    /// Vector length does not match the lattice rank.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// The class admits no Zariski decomposition supported on the declared
    /// curves; carries the failing subset and sign pattern.
    #[error("not pseudoeffective ({}): support {:?}", .0.reason, .0.support)]
    NotPseudoeffective(DecompositionFailure),

    /// Enumeration or search size exceeds a hard guard.
    #[error("guard error: {0}")]
    Guard(String),

    /// An operation's precondition does not hold.
    #[error("precondition error: {0}")]
    Precondition(String),

    /// The central charge is real; the phase is undefined.
    #[error("degenerate charge: Im Z = 0, phase undefined")]
    DegenerateCharge,

    /// The phase collides with arg(±ρ₀), i.e. c₀ = 0.
    #[error("phase collision: c0 = 0, the leading symbol vanishes")]
    PhaseCollision,

    /// Bounded search exhausted without a witness.
    #[error("search failure: {0}")]
    SearchFailure(String),

    /// Invalid family specification for a chamber scan.
    #[error("spec error: {0}")]
    Spec(String),

    /// The nef threshold along the requested ray is an irrational root of
    /// the boundary quadric and cannot be represented exactly.
    #[error("nef threshold is irrational: {0}")]
    IrrationalThreshold(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn dimension(expected: usize, got: usize) -> Self {
        Error::Dimension { expected, got }
    }
}
