use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: max |M_ij - conj(M_ji)| = {violation:.3e}")]
    NotHermitian { violation: f64 },

    #[error("trace is not one: tr = {trace}")]
    TraceNotOne { trace: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue = {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("state is not normalized: |<psi|psi> - 1| = {violation:.3e}")]
    NotNormalized { violation: f64 },

    #[error("matrix is not unitary: max |U^dag U - I| = {violation:.3e}")]
    NotUnitary { violation: f64 },

    #[error("invalid projector {index}: {reason}")]
    InvalidProjector { index: usize, reason: String },

    #[error("projectors {first} and {second} are not orthogonal: max |P_i P_j| = {violation:.3e}")]
    ProjectorsNotOrthogonal {
        first: usize,
        second: usize,
        violation: f64,
    },

    #[error("projectors do not sum to identity: max |sum P_i - I| = {violation:.3e}")]
    IncompleteMeasurement { violation: f64 },

    #[error("measurement is not rank one (outcome {index} has volume {volume})")]
    NotRankOne { index: usize, volume: usize },

    #[error("bipartition {dim_a}x{dim_b} does not match dimension {dim}")]
    InvalidDims { dim: usize, dim_a: usize, dim_b: usize },

    #[error("state carries no bipartition annotation")]
    MissingDims,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("requested dimension {requested} exceeds the dimension cap {cap}")]
    DimensionCap { requested: usize, cap: usize },

    #[error("target entropy {target} is outside the attainable range [{min}, {max}]")]
    EntropyOutOfRange { target: f64, min: f64, max: f64 },

    #[error("Hamiltonian is proportional to the identity; entropy {target} < ln d = {max} has no thermal solution")]
    DegenerateSpectrum { target: f64, max: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigendecomposition did not converge")]
    EigenFailure,
}
