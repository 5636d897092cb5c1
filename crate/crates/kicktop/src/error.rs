//! Crate error type.

/// Errors reported by the simulation library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("spin quantum number must satisfy 2j >= 1 (got 2j = {twice_j})")]
    InvalidSpin { twice_j: u32 },

    #[error("parameter `{name}` must be finite")]
    NonFinite { name: &'static str },

    #[error("parameter `{name}` = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("state norm deviates from 1 by {deviation:.3e}")]
    NotNormalized { deviation: f64 },

    #[error("point is off the unit sphere by {deviation:.3e}")]
    OffSphere { deviation: f64 },

    #[error("map jacobian is singular near the poles (sin(theta) = {sin_theta:.3e})")]
    PolarSingularity { sin_theta: f64 },

    #[error("no stability loss in k range [{k_lo}, {k_hi}]")]
    NoStabilityLoss { k_lo: f64, k_hi: f64 },

    #[error("cycle refinement did not converge at k = {k} (residual {residual:.3e})")]
    CycleNotConverged { k: f64, residual: f64 },

    #[error("infeasible Dicke bipartition: N = {n}, excitations = {excitations}")]
    InfeasibleSplit { n: u32, excitations: i64 },

    #[error("{n} qubits exceeds the brute-force expansion limit of {max}")]
    TooManyQubits { n: u32, max: u32 },

    #[error("invalid density matrix: {reason}")]
    InvalidDensityMatrix { reason: String },

    #[error("parity eigenvalue {value} is not near +-1 (or +-i for half-integer j)")]
    ParityEigenvalue { value: String },

    #[error("empty parameter grid `{name}`")]
    EmptyGrid { name: &'static str },

    #[error("operation requires the {expected} ensemble")]
    EnsembleMismatch { expected: &'static str },

    #[error("power-law fit needs positive values; measure `{measure}` has non-positive entries")]
    NonPositiveFitData { measure: &'static str },

    #[error("not enough points: need {needed}, have {have}")]
    NotEnoughPoints { needed: usize, have: usize },

    #[error("eigendecomposition failed: {reason}")]
    EigenFailure { reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Crate result alias.
pub type Result<T> = std::result::Result<T, Error>;
