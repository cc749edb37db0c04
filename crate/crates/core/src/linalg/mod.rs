//! Dense linear algebra written for this crate: the eigensolver and the
//! matrix exponential. Storage and LU/Cholesky come from nalgebra.

pub mod eigen;
pub mod expm;

pub use eigen::{eigen, eigenvalues, Eigen};
pub use expm::expm;
