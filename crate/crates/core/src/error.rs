use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("support violation: field reaches the padding band (band max {band_max:e}, field max {field_max:e})")]
    SupportViolation { band_max: f64, field_max: f64 },

    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("discrete operator is near singular (condition estimate {cond:e})")]
    NearSingular { cond: f64 },

    #[error("mesh mismatch between operators")]
    MeshMismatch,

    #[error("oscillatory quadrature needs {required} points, above the limit {limit}")]
    ResolutionExceeded { required: usize, limit: usize },

    #[error("perturbation too large: C1 distance {distance:e} is not below delta {delta:e}")]
    PerturbationTooLarge { distance: f64, delta: f64 },

    #[error("far-field cutoff {cutoff} exceeds the Nyquist index {nyquist}")]
    CutoffExceedsNyquist { cutoff: usize, nyquist: usize },

    #[error("argument outside the domain of definition: {0}")]
    DomainError(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
