use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("elements live on different variable sets ({left} vs {right} variables)")]
    VariableSetMismatch { left: usize, right: usize },

    #[error("{n} Grassmann variables exceed the full-algebra cap of {max}; use the sector representation")]
    TooManyVariables { n: usize, max: usize },

    #[error("variable index {index} out of range for {n} variables")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("wave function is not normalized: sum of squares = {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("amplitude vector contains a non-finite entry at {index}")]
    NonFinite { index: usize },

    #[error("negative probability {value} at state {index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("generator is not antisymmetric: max |K + K^T| = {defect:e}")]
    NotAntisymmetric { defect: f64 },

    #[error("operator is not hermitean: max |H - H^dagger| = {defect:e}")]
    NotHermitean { defect: f64 },

    #[error("sector dimension {dim} exceeds the limit {limit}")]
    SectorTooLarge { dim: u128, limit: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("Pauli-excluded input: the antisymmetrized two-particle amplitude vanishes")]
    PauliExcluded,

    #[error("time step {dt} too large for the chosen integrator; use dt <= {suggested}")]
    StepTooLarge { dt: f64, suggested: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("no non-relativistic limit for zero mass")]
    ZeroMass,

    #[error("slit geometry overlaps: {0}")]
    OverlappingSlits(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vacuum state is not static: |K g0| = {residual:e}")]
    VacuumNotStatic { residual: f64 },

    #[error("expression error: {0}")]
    Expression(String),
}
