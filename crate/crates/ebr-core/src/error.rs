//! Error type shared by all modules.

use thiserror::Error;

/// Errors raised by EBR operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EbrError {
    /// Generator bases need at least a qubit.
    #[error("invalid dimension N = {0}: generator bases require N >= 2")]
    InvalidDimension(usize),

    /// The tensor determination is only defined for two qubits here.
    #[error("unsupported tensor dimensions {da}x{db}: only 2x2 is implemented")]
    UnsupportedTensorDimensions { da: usize, db: usize },

    /// Objects built for different Hilbert-space dimensions were mixed.
    #[error("dimension mismatch: {left} vs {right} ({context})")]
    DimensionMismatch {
        left: usize,
        right: usize,
        context: &'static str,
    },

    /// A matrix expected to be Hermitian was not, within tolerance.
    #[error("matrix is not Hermitian: max |M - M^dagger| element = {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    /// A matrix expected to have unit trace did not.
    #[error("trace is not 1: |Tr - 1| = {deviation:.3e}")]
    TraceNotOne { deviation: f64 },

    /// A Bloch vector or matrix does not represent a state (fails PSD).
    #[error("not a state: minimum eigenvalue {min_eigenvalue:.3e} below -{tol:.1e}")]
    NotAState { min_eigenvalue: f64, tol: f64 },

    /// Trajectory parameter outside [0, 1].
    #[error("trajectory parameter tau = {0} outside [0, 1]")]
    TauOutOfRange(f64),

    /// Barycentric coordinates that are not a point of the simplex.
    #[error("breaking point coordinates must be nonnegative and sum to 1 (sum = {0})")]
    InvalidBreakingPoint(f64),

    /// Outcome index outside 0..N.
    #[error("outcome index {index} out of range for {count} outcomes")]
    OutcomeIndexOutOfRange { index: usize, count: usize },

    /// A fused outcome group with zero Born weight was selected. The region
    /// rule never picks such a group, so this signals an internal bug.
    #[error("internal error: zero-probability outcome group {0} was selected")]
    ZeroProbabilityGroup(usize),

    /// Monte Carlo runs need at least one trial.
    #[error("trial count must be positive")]
    ZeroTrials,

    /// Entangled-state amplitudes must satisfy a1^2 + a2^2 = 1.
    #[error("amplitude normalization violated: a1^2 + a2^2 = {0}")]
    NormalizationViolation(f64),

    /// An operation required a specific generator determination.
    #[error("wrong basis determination: expected {expected}, got {got}")]
    WrongDetermination {
        expected: &'static str,
        got: &'static str,
    },

    /// A direction vector expected to have unit length did not.
    #[error("axis is not a unit vector: |n| = {0}")]
    NotAUnitVector(f64),
}

pub type Result<T> = std::result::Result<T, EbrError>;
