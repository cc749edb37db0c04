//! Fourier-mode decomposition of the thermoelastic systems.
//!
//! Under the boundary conditions every unknown expands in either `sin(Nx)` or
//! `cos(Nx)` with `N = mπ`, and the generator maps mode `m` to mode `m` only.
//! Each mode therefore evolves under a finite matrix ("block"). Two
//! realizations of the memory term are provided:
//!
//! * [`PronyBlock`]: the memory is replaced by one auxiliary variable per
//!   exponential of the kernel. Exact, small, used for spectra.
//! * [`GridBlock`]: the history variable is kept on a graded `s`-grid with
//!   upwind transport. Carries the full energy including the memory term.
//!
//! State ordering in both cases is `(a, a', b, b', [c, c',] d, memory...)`
//! for the coefficients of `(φ, φ_t, ψ, ψ_t, [w, w_t,] θ)`.

mod basis;
mod grid;
mod projection;
mod prony;

pub use basis::{assign_bases, BasisAssignment, Parity, Unknown};
pub use grid::{CrankNicolson, GridBlock, GridSpec};
pub use projection::{
    mean_mode_solution, project_initial, InitialFields, MeanModeData, ModalProjection,
    Projection,
};
pub use prony::PronyBlock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::model::{Coupling, Family, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Prony,
    Grid,
}

/// One mode's state vector, tagged with its mode and backend.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalState {
    pub mode: u64,
    pub backend: Backend,
    pub x: DVector<f64>,
}

impl ModalState {
    pub fn is_finite(&self) -> bool {
        self.x.iter().all(|v| v.is_finite())
    }
}

/// Common interface of the per-mode generators.
pub trait ModalOperator: Sync {
    fn mode(&self) -> u64;
    fn backend(&self) -> Backend;
    fn dim(&self) -> usize;
    /// `out = A x`.
    fn apply(&self, x: &DVector<f64>) -> DVector<f64>;
    /// `xᵀ G x`: half the squared energy norm of the mode.
    fn energy(&self, x: &DVector<f64>) -> f64;
}

/// Wave number `N = mπ` of mode `m`.
pub fn wave_number(m: u64) -> f64 {
    m as f64 * PI
}

/// Number of mechanical coordinates (displacements and velocities).
pub fn mech_dim(family: Family) -> usize {
    match family {
        Family::Bresse => 6,
        Family::Timoshenko => 4,
    }
}

/// Index of the temperature coefficient `d` in a block state.
pub fn theta_index(family: Family) -> usize {
    mech_dim(family)
}

/// Strain vectors of the three (or two) energy terms as linear forms of the
/// displacement coefficients `(a, b, [c])`, with the stiffness of each.
pub(crate) fn strains(params: &ModelParams, n: f64) -> Vec<(f64, Vec<f64>)> {
    let l = params.l;
    let s = match params.k {
        Coupling::One => 1.0,
        Coupling::Zero => -1.0,
    };
    match params.family {
        Family::Bresse => vec![
            (params.k1, vec![-s * n, 1.0, l]),
            (params.k2, vec![0.0, s * n, 0.0]),
            (params.k3, vec![-l, 0.0, s * n]),
        ],
        Family::Timoshenko => vec![(params.k1, vec![-s * n, 1.0]), (params.k2, vec![0.0, s * n])],
    }
}

/// Stiffness matrix `K = Σ k_i s_i s_iᵀ` so that the displacements obey `ü = −K u + …`.
pub(crate) fn stiffness(params: &ModelParams, n: f64) -> DMatrix<f64> {
    let st = strains(params, n);
    let q = st[0].1.len();
    let mut k = DMatrix::zeros(q, q);
    for (ki, s) in &st {
        for i in 0..q {
            for j in 0..q {
                k[(i, j)] += ki * s[i] * s[j];
            }
        }
    }
    k
}

/// Coupling strength seen by mode `N`: `δN` for order one, `δ` for order zero.
pub(crate) fn coupling_strength(params: &ModelParams, n: f64) -> f64 {
    match params.k {
        Coupling::One => params.delta * n,
        Coupling::Zero => params.delta,
    }
}

/// Fills the mechanical rows and the `θ` row coupling of a generator, and the
/// mechanical plus `θ` part of its Gram matrix.
pub(crate) fn fill_core(params: &ModelParams, n: f64, a: &mut DMatrix<f64>, g: &mut DMatrix<f64>) {
    let k = stiffness(params, n);
    let q = k.nrows();
    let d = 2 * q;
    let kappa = coupling_strength(params, n);
    for i in 0..q {
        a[(2 * i, 2 * i + 1)] = 1.0;
        for j in 0..q {
            a[(2 * i + 1, 2 * j)] = -k[(i, j)];
            g[(2 * i, 2 * j)] = 0.25 * k[(i, j)];
        }
        g[(2 * i + 1, 2 * i + 1)] = 0.25;
    }
    a[(1, d)] = -kappa;
    a[(d, 1)] = kappa;
    g[(d, d)] = 0.25;
}

/// Generator and Gram restricted to the mechanical and `θ` coordinates,
/// without any memory contribution.
pub(crate) fn fill_core_matrices(params: &ModelParams, n: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let dim = mech_dim(params.family) + 1;
    let mut a = DMatrix::zeros(dim, dim);
    let mut g = DMatrix::zeros(dim, dim);
    fill_core(params, n, &mut a, &mut g);
    (a, g)
}
