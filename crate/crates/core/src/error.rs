use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the solvers in this crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("no convergence in {context}: {detail}")]
    NonConvergence { context: &'static str, detail: String },

    #[error("argument {z} outside the supported Airy sector")]
    SectorViolation { z: Complex64 },

    #[error("function vanishes (|g| = {abs:e}) near contour point {at}")]
    ZeroOnContour { at: Complex64, abs: f64 },

    #[error("winding refinement budget exhausted after {samples} samples")]
    NonResolvable { samples: usize },

    #[error("difference quotient broke down at {at}")]
    DerivativeBreakdown { at: Complex64 },

    #[error("unsupported derivative order {order} for {what}")]
    UnsupportedOrder { what: &'static str, order: usize },

    #[error("structural condition {condition} fails at Y = {y}: margin {margin:e}")]
    StructureViolation { condition: String, y: f64, margin: f64 },

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("iteration does not contract: ratios {ratios:?}")]
    NonContraction { ratios: Vec<f64> },

    #[error("linear system is singular or ill-conditioned (condition estimate {cond:e})")]
    SingularSystem { cond: f64 },

    #[error("winding number is {winding}, expected 1")]
    WindingNotOne { winding: i64, boundary_min_abs: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
