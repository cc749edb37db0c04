//! Time integration of modal states and the energy bookkeeping around it.
//!
//! Prony blocks are stepped exactly with `exp(A·dt)`; grid blocks use
//! Crank–Nicolson, which cannot increase the discrete energy. Each step is
//! checked against that property, so an energy increase always means a
//! numerical problem.

mod fit;

pub use fit::{bound_check, fit_decay, BoundCheck, DecayFit, DecayModel, FitCandidate};

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::PronyKernel;
use crate::linalg::expm;
use crate::modal::{Backend, CrankNicolson, GridBlock, ModalOperator, ModalState, PronyBlock};

/// Allowed energy increase per step, relative to the initial energy.
pub const ENERGY_TOL: f64 = 1e-10;

fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_end: f64,
    pub dt: f64,
    /// States are stored every `stride` steps; energies at every step.
    #[serde(default = "default_stride")]
    pub stride: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, dt: f64) -> Self {
        TimeGrid { t_end, dt, stride: 1 }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParams {
                field: "dt",
                reason: format!("must be positive, got {}", self.dt),
            });
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParams {
                field: "t_end",
                reason: format!("must be nonnegative, got {}", self.t_end),
            });
        }
        if self.stride == 0 {
            return Err(Error::InvalidParams {
                field: "stride",
                reason: "must be at least 1".into(),
            });
        }
        Ok((self.t_end / self.dt).round() as usize)
    }
}

/// One-step propagator of a block.
pub enum Stepper<'a> {
    Exact(nalgebra::DMatrix<f64>),
    CrankNicolson(CrankNicolson<'a>),
}

impl Stepper<'_> {
    pub fn step(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            Stepper::Exact(p) => Ok(p * x),
            Stepper::CrankNicolson(cn) => cn.step(x),
        }
    }
}

/// Blocks that can be stepped in time and report their dissipation.
pub trait Integrable: ModalOperator {
    fn stepper(&self, dt: f64) -> Result<Stepper<'_>>;
    /// `dE/dt` in the form used by the dissipation identity.
    fn dissipation_rate(&self, x: &DVector<f64>) -> f64;
    /// `dE/dt` exactly as the semi-discrete system dissipates it.
    fn discrete_rate(&self, x: &DVector<f64>) -> f64 {
        self.dissipation_rate(x)
    }
}

impl Integrable for PronyBlock {
    fn stepper(&self, dt: f64) -> Result<Stepper<'_>> {
        Ok(Stepper::Exact(expm(&(&self.generator * dt))?))
    }
    fn dissipation_rate(&self, x: &DVector<f64>) -> f64 {
        -PronyBlock::dissipation_rate(self, x)
    }
}

impl Integrable for GridBlock {
    fn stepper(&self, dt: f64) -> Result<Stepper<'_>> {
        Ok(Stepper::CrankNicolson(self.crank_nicolson(dt)?))
    }
    fn dissipation_rate(&self, x: &DVector<f64>) -> f64 {
        self.continuum_energy_rate(x)
    }
    fn discrete_rate(&self, x: &DVector<f64>) -> f64 {
        self.energy_rate(x)
    }
}

/// History of one mode. Energies and rates are kept at every step, states
/// every `stride` steps.
#[derive(Debug, Clone)]
pub struct ModeTrack {
    pub mode: u64,
    pub energy: Vec<f64>,
    pub rate: Vec<f64>,
    pub discrete_rate: Vec<f64>,
    pub states: Vec<DVector<f64>>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub backend: Backend,
    pub dt: f64,
    pub stride: usize,
    /// Times of the energy samples.
    pub times: Vec<f64>,
    pub modes: Vec<ModeTrack>,
}

impl Trajectory {
    /// Times of the stored states.
    pub fn state_times(&self) -> Vec<f64> {
        self.times.iter().step_by(self.stride).copied().collect()
    }

    pub fn total_energy(&self) -> Vec<f64> {
        let mut total = vec![0.0; self.times.len()];
        for m in &self.modes {
            for (t, e) in total.iter_mut().zip(&m.energy) {
                *t += e;
            }
        }
        total
    }
}

fn integrate_one<B: Integrable>(block: &B, x0: &ModalState, grid: &TimeGrid, steps: usize) -> Result<ModeTrack> {
    if x0.mode != block.mode() || x0.backend != block.backend() || x0.x.len() != block.dim() {
        return Err(Error::Shape(format!(
            "state for mode {} ({:?}, dim {}) does not match block for mode {} ({:?}, dim {})",
            x0.mode,
            x0.backend,
            x0.x.len(),
            block.mode(),
            block.backend(),
            block.dim()
        )));
    }
    let stepper = block.stepper(grid.dt)?;
    let mut x = x0.x.clone();
    let e0 = block.energy(&x);
    let mut track = ModeTrack {
        mode: block.mode(),
        energy: Vec::with_capacity(steps + 1),
        rate: Vec::with_capacity(steps + 1),
        discrete_rate: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps / grid.stride + 1),
    };
    let mut prev = e0;
    for i in 0..=steps {
        if i > 0 {
            x = stepper.step(&x)?;
        }
        let e = block.energy(&x);
        if !e.is_finite() || e > prev + ENERGY_TOL * e0 {
            return Err(Error::Integration(format!(
                "energy of mode {} rose from {prev:e} to {e:e} at t = {}; reduce dt (now {})",
                block.mode(),
                i as f64 * grid.dt,
                grid.dt
            )));
        }
        prev = e;
        track.energy.push(e);
        track.rate.push(block.dissipation_rate(&x));
        track.discrete_rate.push(block.discrete_rate(&x));
        if i % grid.stride == 0 {
            track.states.push(x.clone());
        }
    }
    Ok(track)
}

/// Integrates every block from its initial state; modes run in parallel and
/// come back in input order.
pub fn integrate<B: Integrable>(blocks: &[B], initial: &[ModalState], grid: TimeGrid) -> Result<Trajectory> {
    let steps = grid.steps()?;
    if blocks.len() != initial.len() {
        return Err(Error::Shape(format!(
            "{} blocks but {} initial states",
            blocks.len(),
            initial.len()
        )));
    }
    let backend = blocks.first().map(|b| b.backend()).unwrap_or(Backend::Prony);
    let modes = blocks
        .par_iter()
        .zip(initial.par_iter())
        .map(|(b, x)| integrate_one(b, x, &grid, steps))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        backend,
        dt: grid.dt,
        stride: grid.stride,
        times: (0..=steps).map(|i| i as f64 * grid.dt).collect(),
        modes,
    })
}

/// Sampled total energy with its per-mode split.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyTrace {
    pub backend: Backend,
    pub times: Vec<f64>,
    /// `½‖Φ‖²` on the grid backend, the reduced energy on the Prony backend.
    pub total: Vec<f64>,
    pub per_mode: Vec<(u64, Vec<f64>)>,
    /// `(m, ‖Φ₀‖_{D(A^m)})` for the requested orders.
    pub graph_norms: Vec<(u32, f64)>,
}

impl EnergyTrace {
    pub fn from_trajectory(traj: &Trajectory, graph_norms: Vec<(u32, f64)>) -> Self {
        EnergyTrace {
            backend: traj.backend,
            times: traj.times.clone(),
            total: traj.total_energy(),
            per_mode: traj.modes.iter().map(|m| (m.mode, m.energy.clone())).collect(),
            graph_norms,
        }
    }

    /// Every `k`-th sample, always keeping the last one.
    pub fn thinned(&self, k: usize) -> Self {
        let k = k.max(1);
        let n = self.times.len();
        let keep: Vec<usize> = (0..n).filter(|i| i % k == 0 || i + 1 == n).collect();
        let pick = |v: &[f64]| keep.iter().map(|&i| v[i]).collect::<Vec<_>>();
        EnergyTrace {
            backend: self.backend,
            times: pick(&self.times),
            total: pick(&self.total),
            per_mode: self.per_mode.iter().map(|(m, e)| (*m, pick(e))).collect(),
            graph_norms: self.graph_norms.clone(),
        }
    }

    /// Largest step-to-step increase relative to `E(0)`.
    pub fn max_increase(&self) -> f64 {
        let e0 = self.total.first().copied().unwrap_or(0.0);
        if e0 == 0.0 {
            return 0.0;
        }
        self.total
            .windows(2)
            .map(|w| (w[1] - w[0]) / e0)
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DissipationReport {
    /// `max |dE/dt (finite difference) − identity| / max |identity|`.
    pub max_violation: f64,
    /// Same against the exact semi-discrete rate; equals `max_violation` on
    /// the Prony backend.
    pub discrete_violation: f64,
    pub samples: usize,
}

/// Five-point centered difference of `e` at interior index `i`.
fn centered_difference(e: &[f64], i: usize, h: f64) -> f64 {
    (e[i - 2] - 8.0 * e[i - 1] + 8.0 * e[i + 1] - e[i + 2]) / (12.0 * h)
}

fn violation(energy: &[f64], rate: &[f64], h: f64) -> f64 {
    let n = energy.len();
    if n < 5 {
        return 0.0;
    }
    let scale = rate.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    (2..n - 2)
        .map(|i| (centered_difference(energy, i, h) - rate[i]).abs())
        .fold(0.0, f64::max)
        / scale
}

/// Compares the differentiated energy with the dissipation identity, mode by
/// mode, and reports the worst relative violation.
pub fn dissipation_check(traj: &Trajectory) -> DissipationReport {
    let mut max_violation = 0.0f64;
    let mut discrete_violation = 0.0f64;
    for m in &traj.modes {
        max_violation = max_violation.max(violation(&m.energy, &m.rate, traj.dt));
        discrete_violation = discrete_violation.max(violation(&m.energy, &m.discrete_rate, traj.dt));
    }
    DissipationReport {
        max_violation,
        discrete_violation,
        samples: traj.times.len().saturating_sub(4),
    }
}

/// `(Σ_{j≤m} ‖A^j x‖²)^{1/2}` in the energy norm of the block.
pub fn graph_norm<B: ModalOperator + ?Sized>(block: &B, x: &DVector<f64>, m: u32) -> f64 {
    let mut y = x.clone();
    let mut sum = 2.0 * block.energy(&y);
    for _ in 0..m {
        y = block.apply(&y);
        sum += 2.0 * block.energy(&y);
    }
    sum.sqrt()
}

/// Graph norm of a multi-mode state; the modes are orthogonal.
pub fn graph_norm_modes<B: ModalOperator>(blocks: &[B], states: &[ModalState], m: u32) -> f64 {
    blocks
        .iter()
        .zip(states)
        .map(|(b, s)| graph_norm(b, &s.x, m).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Prony memory variables of a grid history,
/// `v_j = ν_j Σ_i Δs_i e^(−ν_j s_i) e_i`. The right-endpoint sum never
/// overshoots `∫ν e^(−νs) ds = 1`, so the mapped reduced energy is bounded by
/// the grid energy.
pub fn grid_to_prony(block: &GridBlock, kernel: &PronyKernel, x: &DVector<f64>) -> DVector<f64> {
    let c = block.mech_dim() + 1;
    let e = &x.as_slice()[c..];
    let mut out = Vec::with_capacity(c + kernel.len());
    out.extend_from_slice(&x.as_slice()[..c]);
    for t in kernel.terms() {
        let v: f64 = block
            .widths
            .iter()
            .zip(&block.nodes)
            .zip(e)
            .map(|((w, s), ei)| w * (-t.rate * s).exp() * ei)
            .sum();
        out.push(t.rate * v);
    }
    DVector::from_vec(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct BackendComparison {
    /// `max_t |x_grid − x_prony|_∞ / max_t |x_prony|_∞` over the mechanical and
    /// temperature coordinates, worst mode.
    pub max_relative_error: f64,
    /// `max_t (E_red − E_H) / E_H(0)` for the two trajectories.
    pub energy_excess: f64,
    /// `max_t (E_red(mapped grid state) − E_H) / E_H(0)`; nonpositive up to rounding.
    pub mapped_energy_excess: f64,
}

/// Compares matched trajectories produced with the same `TimeGrid`.
pub fn compare_backends(
    prony: &[PronyBlock],
    prony_traj: &Trajectory,
    grid: &[GridBlock],
    grid_traj: &Trajectory,
    kernel: &PronyKernel,
) -> Result<BackendComparison> {
    if prony_traj.modes.len() != grid_traj.modes.len()
        || prony_traj.times.len() != grid_traj.times.len()
        || prony_traj.stride != grid_traj.stride
    {
        return Err(Error::Shape("trajectories are not matched".into()));
    }
    let mut max_rel = 0.0f64;
    let mut excess = f64::NEG_INFINITY;
    let mut mapped = f64::NEG_INFINITY;
    let e0: f64 = grid_traj.modes.iter().map(|m| m.energy[0]).sum();
    let scale = if e0 > 0.0 { e0 } else { 1.0 };
    for (((pt, gt), pb), gb) in prony_traj.modes.iter().zip(&grid_traj.modes).zip(prony).zip(grid) {
        let c = pb.mech_dim() + 1;
        let mut err = 0.0f64;
        let mut size = 0.0f64;
        for (xp, xg) in pt.states.iter().zip(&gt.states) {
            for i in 0..c {
                err = err.max((xp[i] - xg[i]).abs());
                size = size.max(xp[i].abs());
            }
            let red = pb.energy(&grid_to_prony(gb, kernel, xg));
            mapped = mapped.max((red - gb.energy(xg)) / scale);
        }
        if size > 0.0 {
            max_rel = max_rel.max(err / size);
        }
        for (ep, eg) in pt.energy.iter().zip(&gt.energy) {
            excess = excess.max((ep - eg) / scale);
        }
    }
    Ok(BackendComparison {
        max_relative_error: max_rel,
        energy_excess: excess,
        mapped_energy_excess: mapped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Coupling, ModelParams};
    use crate::modal::GridSpec;

    fn timo() -> ModelParams {
        ModelParams::timoshenko(Coupling::One, 1.0, 2.0, 1.0, PronyKernel::single(1.0, 1.0).unwrap()).unwrap()
    }

    fn state(block: &PronyBlock, x: Vec<f64>) -> ModalState {
        ModalState {
            mode: block.mode,
            backend: Backend::Prony,
            x: DVector::from_vec(x),
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let b = PronyBlock::assemble(&timo(), 2).unwrap();
        let x = state(&b, vec![0.0; 6]);
        let tr = integrate(&[b], &[x], TimeGrid::new(1.0, 0.1)).unwrap();
        assert!(tr.modes[0].states.iter().all(|s| s.iter().all(|v| *v == 0.0)));
        assert_eq!(dissipation_check(&tr).max_violation, 0.0);
    }

    #[test]
    fn uncoupled_energy_is_conserved() {
        let p = timo().with_delta(0.0);
        let b = PronyBlock::assemble(&p, 1).unwrap();
        let x = state(&b, vec![1.0, 0.0, 0.5, -0.2, 0.0, 0.0]);
        let tr = integrate(&[b], &[x], TimeGrid::new(100.0, 0.5)).unwrap();
        let e = &tr.modes[0].energy;
        let spread = e.iter().map(|v| (v - e[0]).abs()).fold(0.0, f64::max);
        assert!(spread <= 1e-10 * e[0], "{spread}");
    }

    #[test]
    fn mismatched_state_is_rejected() {
        let b = PronyBlock::assemble(&timo(), 1).unwrap();
        let x = state(&b, vec![0.0; 5]);
        assert!(matches!(
            integrate(&[b], &[x], TimeGrid::new(1.0, 0.1)),
            Err(Error::Shape(_))
        ));
        let b = PronyBlock::assemble(&timo(), 1).unwrap();
        let x = state(&b, vec![0.0; 6]);
        assert!(integrate(&[b], &[x], TimeGrid::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn graph_norm_of_real_eigenvector() {
        // Decoupled heat with a fast, light kernel has a real eigenpair on (d, v).
        let p = timo().with_delta(0.0).with_kernel(PronyKernel::single(0.01, 10.0).unwrap());
        let b = PronyBlock::assemble(&p, 1).unwrap();
        let n2 = b.wave_number * b.wave_number;
        let lam = (-10.0 + (100.0 - 4.0 * n2 * 0.01f64).sqrt()) / 2.0;
        let x = DVector::from_vec(vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0 / (lam + 10.0)]);
        assert!((b.apply(&x) - &x * lam).norm() < 1e-14);
        let g0 = graph_norm(&b, &x, 0);
        assert!((g0 - (2.0 * b.energy(&x)).sqrt()).abs() < 1e-15);
        let g1 = graph_norm(&b, &x, 1);
        assert!((g1 - g0 * (1.0 + lam * lam).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn mapped_energy_never_exceeds_grid_energy() {
        let p = timo();
        let gb = GridBlock::assemble(&p, 1, &GridSpec::new(50)).unwrap();
        let pb = PronyBlock::assemble(&p, 1).unwrap();
        let x = DVector::from_fn(gb.dim(), |i, _| ((i * 7919) % 13) as f64 - 6.0);
        let red = pb.energy(&grid_to_prony(&gb, &p.kernel, &x));
        assert!(red <= gb.energy(&x) * (1.0 + 1e-14));
    }
}
