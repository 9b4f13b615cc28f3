//! Exact analysis of error bounds for finite systems of linear inequalities
//! `Ax <= b`.
//!
//! Everything outside [`sampling`] is computed over arbitrary-precision
//! rationals: realizable active sets, the sign and squared magnitude of
//! `min_{|h|=1} max_i d_i^T h`, error-bound and stability verdicts, exact
//! squared Hoffman constants, and certificates that can be re-checked
//! independently of the enumerator.

pub mod active;
pub mod analyzer;
pub mod convex;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod sampling;
pub mod scalar;

pub use active::{ActiveSetFamily, IndexSet, InequalitySystem, Level, Realizability};
pub use analyzer::{
    Certificate, ErrorBoundVerdict, EvalMode, HoffmanConstant, Perturbation, StabilityVerdict,
};
pub use convex::{SignTrichotomy, SquaredMagnitude};
pub use error::{CoreError, Result};
pub use lp::{Feasibility, FarkasCertificate, LinearProgram, LpOutcome, LpStatus};
pub use scalar::{Matrix, Scalar, Vector};
