//! Riemannian and gyrovector geometry on the Cholesky manifold `L₊(n)` and its
//! pullbacks to symmetric positive definite matrices.

pub mod cholesky;
pub mod error;
pub mod gyro;
pub mod line;
pub mod linalg;
pub mod mlr;
pub mod random;
pub mod spd;
pub mod stability;

pub use cholesky::CholeskyMetric;
pub use error::{Error, Result};
pub use gyro::{axiom_suite, Axiom, AxiomReport, GyroSpace};
pub use linalg::{CholeskyPoint, LowerTri, Matrix, Mode, PositiveDiag, SpdPoint};
pub use line::{LineFamily, LineMetric};
pub use mlr::MlrParams;
pub use spd::{BaselineKind, SpdMetric};
pub use stability::{stability_experiment, FailureCell, FailureReport, StabilityConfig, StabilityMetric};
