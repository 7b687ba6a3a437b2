use thiserror::Error;

use crate::quadrature::QuadResult;

/// Errors raised by matrix validation, the integral formulas and the map harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("malformed matrix: {0}")]
    Shape(String),

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("matrix is not Hermitian: defect {defect:e} exceeds {tolerance:e}")]
    NotHermitian { defect: f64, tolerance: f64 },

    #[error("matrix is not positive semi-definite: minimum eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace {0} is not 1")]
    NotUnitTrace(f64),

    #[error("Hermitian eigensolver did not converge")]
    ConvergenceFailure,

    #[error("{what}: value {value} outside its domain")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid weights: {0}")]
    Weights(String),

    #[error("support of sigma is not contained in the support of rho")]
    SupportViolation,

    #[error(
        "quadrature did not converge: value {}, error estimate {:e}",
        .0.value,
        .0.abs_error
    )]
    QuadNotConverged(Box<QuadResult>),

    #[error("integrand is not finite at t = {0}")]
    NonFiniteIntegrand(f64),

    #[error("stencil point t = {reach} lies outside the positivity window ({lo}, {hi})")]
    StencilOutOfWindow { reach: f64, lo: f64, hi: f64 },

    #[error("m exceeds 20 (got {0})")]
    OrderTooLarge(u32),

    #[error("derivative order must be at least 2 (got {0})")]
    OrderTooSmall(u32),

    #[error("malformed map: {0}")]
    MalformedSpec(String),

    #[error("map changes the trace of rho: {before} -> {after}")]
    MapNotTracePreservingOnRho { before: f64, after: f64 },

    #[error("the two states are equal")]
    StatesEqual,

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
