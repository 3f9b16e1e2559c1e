//! Error type shared by all simulation modules.

/// Errors produced by state operations, propagation, and NESS solvers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("site {site} out of range for chain of {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("state length {len} does not match 2^{n_sites}")]
    DimensionMismatch { len: usize, n_sites: usize },

    #[error("dense operations are limited to {max} sites, got {n_sites}")]
    DenseTooLarge { n_sites: usize, max: usize },

    #[error("propagator expansion did not reach tolerance {tolerance:e} within {max_terms} terms")]
    PropagatorNonConvergence { tolerance: f64, max_terms: usize },

    #[error("leading master-operator eigenvalue is degenerate (|lambda_2| = {second_modulus}); NESS is not unique")]
    DegenerateNess { second_modulus: f64 },

    #[error("fixed-point iteration did not converge after {iterations} iterations")]
    FixedPointNonConvergence { iterations: usize },

    #[error("left/right steady-current forms disagree beyond tolerance: {left} vs {right}")]
    CurrentImbalance { left: f64, right: f64 },

    #[error("no simulated time accumulated after burn-in")]
    ZeroAccumulatedTime,

    #[error("fit residual {residual:e} exceeds tolerance {tolerance:e}")]
    FitResidual { residual: f64, tolerance: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dense linear algebra failed: {0}")]
    LinearAlgebra(String),
}

pub type Result<T> = std::result::Result<T, Error>;
