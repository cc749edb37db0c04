//! Thermoelastic Bresse and Timoshenko beams with Gurtin–Pipkin heat
//! conduction, reduced to exact per-mode generators.

pub mod acceptance;
pub mod dynamics;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod modal;
pub mod model;
pub mod spectra;
pub mod witness;

pub use error::{Error, KernelError, Result};
pub use kernel::{KernelTerm, PronyKernel};
pub use model::{classify, Coupling, Expected, Family, ModelParams, StabilityVerdict};

/// Version of this library, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
