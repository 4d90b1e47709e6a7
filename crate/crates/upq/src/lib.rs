//! Numerical toolkit for the indefinite unitary group U(p,q): the group and
//! its Iwasawa subgroup in explicit matrix coordinates, Bargmann-space
//! representations of the Heisenberg subgroup, nonunitary representations of
//! the Iwasawa group with explicit 1-cocycles, their extension to the whole
//! group, and quasi-Poisson models for the associated current groups.
//!
//! All numerics are double precision. Algebraic identities are tested at
//! tight tolerances (1e-10 .. 1e-8); Monte Carlo quantities carry explicit
//! standard errors and seeds.

pub mod bargmann;
pub mod cocycle;
pub mod current;
pub mod group;
pub mod iwasawa;
pub mod matrix;
pub mod measures;
pub mod qpoisson;
pub mod suite;

use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum Error {
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is not positive definite (pivot {pivot:.3e})")]
    NotPositiveDefinite { pivot: f64 },
    #[error("matrix is not skew-Hermitian (defect {defect:.3e})")]
    NotSkewHermitian { defect: f64 },
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error("signature mismatch: ({p1},{q1}) vs ({p2},{q2})")]
    SignatureMismatch { p1: usize, q1: usize, p2: usize, q2: usize },
    #[error("decomposition failed: {context}")]
    DecompositionFailed { context: String },
    #[error("invalid input: {context}")]
    InvalidInput { context: String },
    #[error("estimate is not finite: {context}")]
    NonFinite { context: String },
    #[error("expected point count {expected:.1} exceeds the cap {cap}")]
    WindowTooLarge { expected: f64, cap: f64 },
    #[error("quadrature did not stabilize: {context}")]
    QuadratureUnstable { context: String },
    #[error("step-current variant mismatch: {context}")]
    VariantMismatch { context: String },
    #[error("invalid configuration: {context}")]
    ConfigInvalid { context: String },
}

pub use group::{GroupElement, Signature};
pub use iwasawa::{HeisenbergElement, IwasawaElement, TriangularS};
pub use matrix::CMatrix;
pub use measures::SignVector;
