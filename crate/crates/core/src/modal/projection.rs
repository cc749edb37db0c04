use nalgebra::DVector;

use super::{assign_bases, wave_number, Backend, GridBlock, ModalState, Parity};
use crate::error::{Error, Result};
use crate::kernel::PronyKernel;
use crate::model::{Coupling, Family, ModelParams};

/// Initial data sampled on the uniform grid `x_i = i/K`, `i = 0..=K`.
///
/// `theta_history[i][j]` is the past temperature `θ(x_i, −s_j)`; the column
/// `s = 0` is the initial temperature. Timoshenko data leave `w0`/`w1` empty.
#[derive(Debug, Clone, Default)]
pub struct InitialFields {
    pub phi0: Vec<f64>,
    pub phi1: Vec<f64>,
    pub psi0: Vec<f64>,
    pub psi1: Vec<f64>,
    pub w0: Vec<f64>,
    pub w1: Vec<f64>,
    pub s: Vec<f64>,
    pub theta_history: Vec<Vec<f64>>,
}

impl InitialFields {
    /// Samples analytic profiles on `samples + 1` points and the history on `s`.
    pub fn from_fns(
        samples: usize,
        s: &[f64],
        fields: [&dyn Fn(f64) -> f64; 6],
        theta: &dyn Fn(f64, f64) -> f64,
    ) -> Self {
        let xs: Vec<f64> = (0..=samples).map(|i| i as f64 / samples as f64).collect();
        let sample = |f: &dyn Fn(f64) -> f64| xs.iter().map(|&x| f(x)).collect::<Vec<_>>();
        InitialFields {
            phi0: sample(fields[0]),
            phi1: sample(fields[1]),
            psi0: sample(fields[2]),
            psi1: sample(fields[3]),
            w0: sample(fields[4]),
            w1: sample(fields[5]),
            s: s.to_vec(),
            theta_history: xs.iter().map(|&x| s.iter().map(|&sj| theta(x, sj)).collect()).collect(),
        }
    }
}

/// Spatial means of the cosine-parity displacements and their velocities,
/// as `(value, rate)` pairs. Unused entries are zero.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct MeanModeData {
    pub phi: (f64, f64),
    pub psi: (f64, f64),
    pub w: (f64, f64),
}

fn oscillate((x0, v0): (f64, f64), omega: f64, t: f64) -> (f64, f64) {
    let (s, c) = (omega * t).sin_cos();
    (x0 * c + v0 / omega * s, -x0 * omega * s + v0 * c)
}

fn drift((x0, v0): (f64, f64), t: f64) -> (f64, f64) {
    (x0 + v0 * t, v0)
}

impl MeanModeData {
    /// Evolves the means, which decouple from the `m ≥ 1` modes.
    ///
    /// * Bresse, order one: `φ̂'' + l²k3 φ̂ = 0`.
    /// * Bresse, order zero: `u = ψ̂ + l ŵ` solves `u'' + k1(1 + l²) u = 0`
    ///   while `z = l ψ̂ − ŵ` moves with constant speed.
    /// * Timoshenko, order one: `φ̂'' = 0`.
    /// * Timoshenko, order zero: `ψ̂'' + k1 ψ̂ = 0`.
    pub fn evolve(&self, params: &ModelParams, t: f64) -> MeanModeData {
        let (k1, k3, l) = (params.k1, params.k3, params.l);
        match (params.family, params.k) {
            (Family::Bresse, Coupling::One) => MeanModeData {
                phi: oscillate(self.phi, l * k3.sqrt(), t),
                ..*self
            },
            (Family::Bresse, Coupling::Zero) => {
                let u0 = (self.psi.0 + l * self.w.0, self.psi.1 + l * self.w.1);
                let z0 = (l * self.psi.0 - self.w.0, l * self.psi.1 - self.w.1);
                let u = oscillate(u0, (k1 * (1.0 + l * l)).sqrt(), t);
                let z = drift(z0, t);
                let den = 1.0 + l * l;
                MeanModeData {
                    phi: self.phi,
                    psi: ((u.0 + l * z.0) / den, (u.1 + l * z.1) / den),
                    w: ((l * u.0 - z.0) / den, (l * u.1 - z.1) / den),
                }
            }
            (Family::Timoshenko, Coupling::One) => MeanModeData {
                phi: drift(self.phi, t),
                ..*self
            },
            (Family::Timoshenko, Coupling::Zero) => MeanModeData {
                psi: oscillate(self.psi, k1.sqrt(), t),
                ..*self
            },
        }
    }
}

/// Closed-form mean of `φ` for the order-one Bresse model.
pub fn mean_mode_solution(phi0: f64, phi1: f64, l: f64, k3: f64, t: f64) -> f64 {
    oscillate((phi0, phi1), l * k3.sqrt(), t).0
}

/// Modal coefficients of one mode before choosing a backend.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalProjection {
    pub mode: u64,
    /// `(a, a', b, b', [c, c'])`.
    pub mech: Vec<f64>,
    /// Temperature history coefficients `θ_m(−s_j)` on the input `s` grid.
    pub s: Vec<f64>,
    pub theta_history: Vec<f64>,
    /// `η_m(s_j) = ∫₀^{s_j} θ_m(−τ) dτ` (trapezoid).
    pub eta: Vec<f64>,
}

impl ModalProjection {
    pub fn theta(&self) -> f64 {
        self.theta_history.first().copied().unwrap_or(0.0)
    }

    /// Prony state with `v_j = ∫ e^(−ν_j s) θ_m(−s) ds` on the input grid.
    pub fn prony_state(&self, kernel: &PronyKernel) -> ModalState {
        let mut x = self.mech.clone();
        x.push(self.theta());
        for t in kernel.terms() {
            let vals: Vec<f64> = self
                .s
                .iter()
                .zip(&self.theta_history)
                .map(|(s, th)| (-t.rate * s).exp() * th)
                .collect();
            x.push(trapezoid(&self.s, &vals));
        }
        ModalState {
            mode: self.mode,
            backend: Backend::Prony,
            x: DVector::from_vec(x),
        }
    }

    /// Grid state with `e_i = η_m(s_i)`, interpolated linearly and held
    /// constant beyond the last input sample (zero history there).
    pub fn grid_state(&self, block: &GridBlock) -> ModalState {
        let mut x = self.mech.clone();
        x.push(self.theta());
        for &s in &block.nodes {
            x.push(interpolate(&self.s, &self.eta, s));
        }
        ModalState {
            mode: self.mode,
            backend: Backend::Grid,
            x: DVector::from_vec(x),
        }
    }
}

/// All modes `1..=m_max` plus the mean components.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub modes: Vec<ModalProjection>,
    pub mean: MeanModeData,
}

fn trapezoid(s: &[f64], v: &[f64]) -> f64 {
    s.windows(2)
        .zip(v.windows(2))
        .map(|(s, v)| 0.5 * (s[1] - s[0]) * (v[0] + v[1]))
        .sum()
}

fn cumulative(s: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(s.len());
    let mut acc = 0.0;
    for i in 0..s.len() {
        if i > 0 {
            acc += 0.5 * (s[i] - s[i - 1]) * (v[i] + v[i - 1]);
        } else {
            // η(0) = 0 requires the grid to start at s = 0; otherwise the
            // first panel is extrapolated with a constant.
            acc += s[0] * v[0];
        }
        out.push(acc);
    }
    out
}

fn interpolate(s: &[f64], v: &[f64], at: f64) -> f64 {
    if s.is_empty() {
        return 0.0;
    }
    if at <= s[0] {
        return if s[0] > 0.0 { v[0] * at / s[0] } else { v[0] };
    }
    match s.iter().position(|&sj| sj >= at) {
        None => *v.last().expect("non-empty"),
        Some(j) => {
            let w = (at - s[j - 1]) / (s[j] - s[j - 1]);
            v[j - 1] * (1.0 - w) + v[j] * w
        }
    }
}

/// Trapezoid coefficient of `f` against the basis on the uniform grid.
/// Returns `2∫ f·b` for `m ≥ 1` and `∫ f` for `m = 0`.
fn coefficient(f: &[f64], parity: Parity, m: u64) -> f64 {
    let k = f.len() - 1;
    let n = wave_number(m);
    let mut acc = 0.0;
    for (i, v) in f.iter().enumerate() {
        let x = i as f64 / k as f64;
        let w = if i == 0 || i == k { 0.5 } else { 1.0 };
        acc += w * v * parity.eval(n, x);
    }
    let integral = acc / k as f64;
    if m == 0 {
        integral
    } else {
        2.0 * integral
    }
}

pub fn project_initial(params: &ModelParams, data: &InitialFields, m_max: u64) -> Result<Projection> {
    params.validate_structure()?;
    let bases = assign_bases(params);
    let bresse = params.is_bresse();
    let len = data.phi0.len();
    if len < 2 {
        return Err(Error::Shape("need at least two x samples".into()));
    }
    let mut fields: Vec<(&str, &Vec<f64>)> = vec![
        ("phi0", &data.phi0),
        ("phi1", &data.phi1),
        ("psi0", &data.psi0),
        ("psi1", &data.psi1),
    ];
    if bresse {
        fields.push(("w0", &data.w0));
        fields.push(("w1", &data.w1));
    }
    for (name, f) in &fields {
        if f.len() != len {
            return Err(Error::Shape(format!("{name} has {} samples, expected {len}", f.len())));
        }
    }
    if data.theta_history.len() != len {
        return Err(Error::Shape(format!(
            "theta history has {} rows, expected {len}",
            data.theta_history.len()
        )));
    }
    if data.s.is_empty() || data.s.windows(2).any(|p| p[1] <= p[0]) || data.s[0] < 0.0 {
        return Err(Error::Shape("history s grid must be nonempty, nonnegative and increasing".into()));
    }
    if let Some(row) = data.theta_history.iter().find(|r| r.len() != data.s.len()) {
        return Err(Error::Shape(format!(
            "theta history row has {} samples, expected {}",
            row.len(),
            data.s.len()
        )));
    }

    let parities = [
        bases.phi,
        bases.phi,
        bases.psi,
        bases.psi,
        bases.w.unwrap_or(Parity::Sin),
        bases.w.unwrap_or(Parity::Sin),
    ];
    let mut modes = Vec::with_capacity(m_max as usize);
    for m in 1..=m_max {
        let mech = fields
            .iter()
            .zip(parities)
            .map(|((_, f), p)| coefficient(f, p, m))
            .collect();
        let theta_history: Vec<f64> = (0..data.s.len())
            .map(|j| {
                let column: Vec<f64> = data.theta_history.iter().map(|r| r[j]).collect();
                coefficient(&column, bases.theta, m)
            })
            .collect();
        let eta = cumulative(&data.s, &theta_history);
        modes.push(ModalProjection {
            mode: m,
            mech,
            s: data.s.clone(),
            theta_history,
            eta,
        });
    }

    let mean_of = |f: &Vec<f64>, p: Parity| match p {
        Parity::Cos => coefficient(f, p, 0),
        Parity::Sin => 0.0,
    };
    let mut mean = MeanModeData {
        phi: (mean_of(&data.phi0, bases.phi), mean_of(&data.phi1, bases.phi)),
        psi: (mean_of(&data.psi0, bases.psi), mean_of(&data.psi1, bases.psi)),
        w: (0.0, 0.0),
    };
    if let Some(p) = bases.w {
        mean.w = (mean_of(&data.w0, p), mean_of(&data.w1, p));
    }
    Ok(Projection { modes, mean })
}
