use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("diagonal entry {index} is not positive: {value}")]
    NonPositiveDiagonal { index: usize, value: f64 },

    #[error("matrix is not lower triangular: entry ({row}, {col}) is nonzero")]
    NotLowerTriangular { row: usize, col: usize },

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("triangular matrix is singular at diagonal entry {index}")]
    SingularTriangular { index: usize },

    #[error("matrix function needs a positive spectrum, found eigenvalue {eigenvalue}")]
    NonPositiveSpectrum { eigenvalue: f64 },

    #[error("value outside the positive half-line: {0}")]
    Domain(f64),

    #[error("geodesic parameter leaves the domain at diagonal slot {slot}")]
    OutOfDomain { slot: usize },

    #[error("weights must be positive and sum to one")]
    BadWeights,

    #[error("deformation exponent must be nonzero")]
    ZeroTheta,

    #[error("gyro operation undefined: {op} leaves the positive cone at slot {slot}")]
    GyroDomain { op: &'static str, slot: usize },

    #[error("unsupported: {0}")]
    Unsupported(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),
}
