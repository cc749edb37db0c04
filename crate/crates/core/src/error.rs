use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the kernel constructor and validator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("kernel has no terms")]
    Empty,
    #[error("kernel term {index}: weight must be positive, got {value}")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("kernel term {index}: rate must be positive, got {value}")]
    NonPositiveRate { index: usize, value: f64 },
    #[error("kernel terms {first} and {second} share the rate {rate}; merge their weights")]
    RepeatedRate { first: usize, second: usize, rate: f64 },
    #[error("kernel inequality -mu2 g <= g' <= -mu1 g fails at s = {s} (excess {excess:e})")]
    RateBounds { s: f64, excess: f64 },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Kernel(#[from] KernelError),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("transform pole at z = {z} (rate {rate})")]
    Pole { z: Complex64, rate: f64 },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("history grid too short: s_max = {s_max} leaves a kernel tail above 1e-10 g0; need s_max >= {required}")]
    TailBound { s_max: f64, required: f64 },

    #[error("QR iteration did not converge after {sweeps} sweeps ({found} of {size} eigenvalues found)")]
    NoConvergence {
        sweeps: usize,
        found: usize,
        size: usize,
        partial: Vec<Complex64>,
    },

    #[error("resolvent is singular at {lambda}: distance to spectrum {distance:e}")]
    SingularResolvent { lambda: Complex64, distance: f64 },

    #[error("witness construction violates equation {equation} (residual {residual:e}, tolerance {tolerance:e})")]
    ConstructionBug {
        equation: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("integration unstable: {0}")]
    Integration(String),

    #[error("shape mismatch: {0}")]
    Shape(String),
}
