//! Numerical library for the canonical (Bergman-orthogonal) solution of the
//! Cauchy-Riemann equation on product domains.
//!
//! Given a dbar-closed (0,1)-form `f = sum_j f_j dzbar_j` on `Omega^n`, where
//! `Omega` is the unit disc or a conformal image of it, the solver builds the
//! canonical solution `u` of `dbar u = f` (the solution orthogonal to the
//! Bergman space) through explicit Green's-function kernels and slotwise
//! integral operators, and cross-checks it against an exact monomial oracle.
//!
//! The crate is organized around the pipeline:
//!
//! - [`geometry`]: domains, polar quadrature grids, evaluation sets
//! - [`fields`]: scalar fields and one-forms in monomial / grid / analytic form
//! - [`kernels`]: closed-form Green's, Cauchy-derivative and Bergman kernels,
//!   plus the composite kernels used by the decomposed solver
//! - [`operators`]: the integral operators T and P and their slotwise and
//!   composite variants
//! - [`solver`]: canonical solves by operator composition (both orderings),
//!   by kernel decomposition, and by the exact monomial oracle
//! - [`lab`]: experiments that measure the operator-norm constants empirically
//! - [`config`] / [`report`]: deterministic CLI configuration and artifacts

pub mod config;
pub mod fields;
pub mod geometry;
pub mod kernels;
pub mod lab;
pub mod operators;
pub mod report;
pub mod runner;
pub mod solver;

pub use num_complex::Complex64;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid parameter: {0}")]
    InvalidGrid(String),
    #[error("point outside domain: {0}")]
    OutsideDomain(String),
    #[error("coincident kernel points (|z - w| < 1e-13)")]
    CoincidentPoints,
    #[error("invalid kernel indices: {0}")]
    BadIndices(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unsupported field representation: {0}")]
    Representation(String),
    #[error("expression parse error: {0}")]
    Parse(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("one-form is not dbar-closed: residual {0:.3e} exceeds threshold {1:.3e}")]
    NotClosed(f64, f64),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
