//! Explicit sequences `(λ_n, Φ_n, F_n)` with `iλ_nΦ_n − AΦ_n = F_n`,
//! `‖F_n‖ ≤ 1` and `‖Φ_n‖ → ∞`, which rule out a uniform resolvent bound on
//! the imaginary axis.
//!
//! Every element lives on one Fourier mode with `N = (n+1)π`. The
//! displacements carry coefficients `α_1..α_3`, the temperature `α_4`, and the
//! history is `η = (i/λ)(e^(−iλs) − 1)θ`, which solves the transport
//! equation exactly. The forcing has coefficients `β_2, β_4, β_6` on the
//! velocity rows and `β_7` on the temperature row.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::PronyKernel;
use crate::modal::{fill_core_matrices, mech_dim};
use crate::model::{Coupling, Family, ModelParams, EQUALITY_TOL};

/// Largest index used to estimate `sup_n a_3,n`.
pub const SUP_INDEX: u64 = 10_000;
/// Residual tolerance relative to `1 + ‖Φ_n‖`.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WitnessCase {
    /// Bresse with `k2 = k3`, `λ = N√k3`.
    BresseK2eqK3,
    /// Bresse with `k2 ≠ k3`, `λ = √(k2N² + k1)`.
    BresseCase32,
    /// Bresse with `k2 ≠ k3`, `λ = √(k3N² + l²k1)`.
    BresseCase33,
    /// Timoshenko, `λ = √(k2N² + k1)`.
    TimoCase1,
    /// Timoshenko order zero with `k1 = k2 ≠ g₀`, `λ = √(k1N² + k1N + k1/2)`.
    TimoCase2,
}

impl WitnessCase {
    pub const ALL: [WitnessCase; 5] = [
        WitnessCase::BresseK2eqK3,
        WitnessCase::BresseCase32,
        WitnessCase::BresseCase33,
        WitnessCase::TimoCase1,
        WitnessCase::TimoCase2,
    ];
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessSequence {
    pub case: WitnessCase,
    pub n: u64,
    /// `N = (n+1)π`.
    pub wave_number: f64,
    pub lambda: f64,
    /// `α_1..α_4`.
    pub alpha: [Complex64; 4],
    /// `β_2, β_4, β_6, β_7` as they enter the forcing (`β_4` already scaled).
    pub beta: [Complex64; 4],
    /// `ĝ(iλ)`.
    pub mu2: Complex64,
    /// `δ²λ²/(λ² − N²(g₀ − ĝ(iλ)))` where the construction uses it, else 0.
    pub mu_k: Complex64,
    /// `|λ² − N²(g₀ − ĝ(iλ))|`, reported for conditioning.
    pub denominator_abs: f64,
    /// Mechanical coordinates and temperature in block order.
    #[serde(skip)]
    pub state: DVector<Complex64>,
    /// Forcing in block order.
    #[serde(skip)]
    pub forcing: DVector<Complex64>,
    pub f_norm: f64,
    pub phi_norm: f64,
    /// `‖η‖²` in the weighted history space.
    pub eta_norm_sq: f64,
    /// Absolute residual of each of the eight resolvent equations.
    pub equation_residuals: [f64; 8],
    pub residual: f64,
    /// `sup_n a_3,n` used by the normalization, when one is needed.
    pub sup_a3: Option<f64>,
}

/// `‖η‖² = (N²/2)|θ|²(2/λ²)(g₀ − Re ĝ(iλ))` for `η = (i/λ)(e^(−iλs) − 1)θ sin(Nx)`.
pub fn eta_norm(theta: Complex64, lambda: f64, n: f64, kernel: &PronyKernel) -> Result<f64> {
    if lambda == 0.0 {
        return Err(Error::Domain("history profile needs λ ≠ 0".into()));
    }
    let g = kernel.mu2_of(lambda);
    Ok(0.5 * n * n * theta.norm_sqr() * 2.0 / (lambda * lambda) * (kernel.g0() - g.re))
}

fn rel_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= EQUALITY_TOL * a.abs().max(b.abs())
}

fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

pub fn check_hypotheses(params: &ModelParams, case: WitnessCase) -> Result<()> {
    params.validate()?;
    let (k1, k2, k3, g0) = (params.k1, params.k2, params.k3, params.g0());
    let d2 = params.delta * params.delta;
    let bresse = params.family == Family::Bresse;
    let one = params.k == Coupling::One;
    match case {
        WitnessCase::BresseK2eqK3 => {
            if !bresse {
                return Err(precondition("case k2 = k3 needs a Bresse model"));
            }
            if !rel_eq(k2, k3) {
                return Err(precondition(format!("case k2 = k3 needs k2 = k3, got {k2} and {k3}")));
            }
        }
        WitnessCase::BresseCase32 | WitnessCase::BresseCase33 => {
            if !bresse {
                return Err(precondition("case needs a Bresse model"));
            }
            if rel_eq(k2, k3) {
                return Err(precondition("case needs k2 ≠ k3"));
            }
            let kj = if case == WitnessCase::BresseCase32 { k2 } else { k3 };
            if one {
                let rhs = (kj - k1) * (kj - g0) / kj;
                if rel_eq(d2, rhs) {
                    return Err(precondition(format!(
                        "case needs delta^2 ≠ (kj-k1)(kj-g0)/kj = {rhs} with kj = {kj}"
                    )));
                }
            } else if case == WitnessCase::BresseCase32 && rel_eq(k2, k1) {
                return Err(precondition("order-zero case needs k2 ≠ k1"));
            } else if case == WitnessCase::BresseCase33 && !rel_eq(k2, k1) {
                return Err(precondition("order-zero case needs k2 = k1"));
            }
        }
        WitnessCase::TimoCase1 => {
            if bresse {
                return Err(precondition("case needs a Timoshenko model"));
            }
            if one {
                let rhs = (k2 - k1) * (k2 - g0) / k2;
                if rel_eq(d2, rhs) {
                    return Err(precondition(format!(
                        "case needs the order-one exponential condition to fail, but delta^2 = {rhs}"
                    )));
                }
            } else if rel_eq(k1, k2) {
                return Err(precondition("order-zero case needs k1 ≠ k2"));
            }
        }
        WitnessCase::TimoCase2 => {
            if bresse || one {
                return Err(precondition("case needs an order-zero Timoshenko model"));
            }
            if !rel_eq(k1, k2) {
                return Err(precondition("case needs k1 = k2"));
            }
            if rel_eq(k1, g0) {
                return Err(precondition("case needs k1 ≠ g0"));
            }
        }
    }
    Ok(())
}

/// `λ_n` of the case.
pub fn lambda_of(params: &ModelParams, case: WitnessCase, n_wave: f64) -> f64 {
    let (k1, k2, k3, l) = (params.k1, params.k2, params.k3, params.l);
    let n2 = n_wave * n_wave;
    match case {
        WitnessCase::BresseK2eqK3 => n_wave * k3.sqrt(),
        WitnessCase::BresseCase32 | WitnessCase::TimoCase1 => (k2 * n2 + k1).sqrt(),
        WitnessCase::BresseCase33 => (k3 * n2 + l * l * k1).sqrt(),
        WitnessCase::TimoCase2 => (k1 * n2 + k1 * n_wave + 0.5 * k1).sqrt(),
    }
}

fn n_of(n: u64) -> f64 {
    (n + 1) as f64 * PI
}

/// `(a_1, a_2)` of the `λ = √(k2N² + k1)` Bresse case.
fn a12_case32(params: &ModelParams, n: f64) -> (f64, f64) {
    let (k1, k2, k3, l) = (params.k1, params.k2, params.k3, params.l);
    let n2 = n * n;
    let a1 = ((k3 - k2) * n2 + l * l * k1 - k1) / (l * l * k1) - (k1 + k3) / k1;
    let a2 = ((k2 - k3) * n2 + k1 - l * l * k1) / (l * l * k1);
    (a1, a2)
}

/// `(a_1, a_2)` of the `λ = √(k3N² + l²k1)` Bresse case.
fn a12_case33(params: &ModelParams, n: f64) -> (f64, f64) {
    let (k1, k2, k3, l) = (params.k1, params.k2, params.k3, params.l);
    let n2 = n * n;
    let a1 = (k1 + k3) / (l * k1 * k1) * (k2 - k3) * n2 + k3 / (l * k1) - l * (k1 + k3) / k1;
    let a2 = ((k3 - k2) * n2 + l * l * k1 - k1) / ((l * k1) * (l * k1));
    (a1, a2)
}

/// `a_3,n`: squared temperature forcing per unit squared base forcing for the
/// order-zero normalizations.
fn a3(params: &ModelParams, case: WitnessCase, n: f64) -> f64 {
    let (k1, k2, k3, l) = (params.k1, params.k2, params.k3, params.l);
    let d2 = params.delta * params.delta;
    let n2 = n * n;
    match case {
        WitnessCase::BresseCase32 => {
            let (a1, a2) = a12_case32(params, n);
            let lam2 = k2 * n2 + k1;
            let num = k1 * a2 + k1 + k3;
            let den = (k2 + k3 - k1 * a1) * n2 + k1 - l * l * k3;
            d2 * num * num * n2 * lam2 / (den * den)
        }
        WitnessCase::BresseCase33 => {
            let (a1, a2) = a12_case33(params, n);
            let lam2 = k3 * n2 + l * l * k1;
            let num = l * (k1 + k3) * a2 + 1.0 / l;
            let den = (2.0 * k3 - l * (k1 + k3) * a1) * n2 + l * l * (k1 - k3);
            d2 * num * num * n2 * lam2 / (den * den)
        }
        WitnessCase::TimoCase1 => d2 * (k2 * n2 + k1) / (k1 * k1 * n2),
        _ => 0.0,
    }
}

fn a3_limit(params: &ModelParams, case: WitnessCase) -> f64 {
    let (k1, k2, k3, l) = (params.k1, params.k2, params.k3, params.l);
    let d2 = params.delta * params.delta;
    match case {
        WitnessCase::BresseCase32 => d2 * k2,
        WitnessCase::BresseCase33 => d2 * k3 / (l * l * (k1 + k3) * (k1 + k3)),
        WitnessCase::TimoCase1 => d2 * k2 / (k1 * k1),
        _ => 0.0,
    }
}

/// `sup_n a_3,n` over `n ≤ SUP_INDEX` together with the `n → ∞` limit.
pub fn sup_a3(params: &ModelParams, case: WitnessCase) -> f64 {
    (0..=SUP_INDEX)
        .into_par_iter()
        .map(|n| a3(params, case, n_of(n)))
        .reduce(|| a3_limit(params, case), f64::max)
}

/// Base forcing amplitude (`β_4`, `β_6` or 1) and the sup it used.
fn normalization(params: &ModelParams, case: WitnessCase) -> (f64, Option<f64>) {
    let one = params.k == Coupling::One;
    let k1 = params.k1;
    match case {
        WitnessCase::BresseK2eqK3 | WitnessCase::TimoCase2 => (1.0, None),
        WitnessCase::BresseCase32 => {
            // The forcing row carries k1·β4, so k1 enters the normalization.
            if one {
                (1.0 / k1.max(1.0), None)
            } else {
                let s = sup_a3(params, case);
                (1.0 / ((k1 * k1).max(1.0) + s).sqrt(), Some(s))
            }
        }
        WitnessCase::BresseCase33 | WitnessCase::TimoCase1 => {
            if one {
                (1.0, None)
            } else {
                let s = sup_a3(params, case);
                (1.0 / (1.0 + s).sqrt(), Some(s))
            }
        }
    }
}

/// Builds element `n` of the sequence.
pub fn build_witness(params: &ModelParams, case: WitnessCase, n: u64) -> Result<WitnessSequence> {
    check_hypotheses(params, case)?;
    let (base, sup) = normalization(params, case);
    build_with_normalization(params, case, n, base, sup)
}

fn build_with_normalization(
    params: &ModelParams,
    case: WitnessCase,
    n: u64,
    base: f64,
    sup: Option<f64>,
) -> Result<WitnessSequence> {
    let (k1, k2, k3, l, delta) = (params.k1, params.k2, params.k3, params.l, params.delta);
    let one = params.k == Coupling::One;
    let nw = n_of(n);
    let n2 = nw * nw;
    let lambda = lambda_of(params, case, nw);
    let lam2 = lambda * lambda;
    let mu2 = params.kernel.mu2_of(lambda);
    let den = Complex64::new(lam2, 0.0) - (Complex64::new(params.g0(), 0.0) - mu2) * n2;
    let c = |v: f64| Complex64::new(v, 0.0);
    let i = Complex64::i();
    // μ_k enters where the temperature is driven by α_1.
    let thermal = one || case == WitnessCase::TimoCase2;
    let mu_k = if thermal { c(delta * delta * lam2) / den } else { c(0.0) };

    let zero = c(0.0);
    let (alpha1, alpha2, alpha3, beta2, beta4, beta6);
    match case {
        WitnessCase::BresseK2eqK3 => {
            alpha1 = zero;
            alpha3 = c(1.0 / (l * k3 * (1.0 + l * l).sqrt()));
            alpha2 = alpha3 * (-l * (k1 + k3) / k1);
            beta2 = zero;
            beta4 = alpha3 * (-l * k3);
            beta6 = alpha3 * (-l * l * k3);
        }
        WitnessCase::BresseCase32 => {
            let (a1, a2) = a12_case32(params, nw);
            let b4 = c(base);
            let denom = (c(k2 + k3 - k1 * a1) - mu_k) * n2 + k1 - l * l * k3;
            alpha1 = b4 * (k1 * a2 + k1 + k3) * nw / denom;
            alpha3 = (-alpha1 * nw + b4) / l;
            // a1·N·α1 + β4·a2 with the a1·a2 products cancelled by hand;
            // the direct form loses about N² in relative accuracy.
            let shifted = (c(k2 + k3) - mu_k) * n2 + k1 - l * l * k3;
            alpha2 = b4 * (a1 * n2 * (k1 + k3) + shifted * a2) / denom;
            beta2 = zero;
            beta4 = b4 * k1;
            beta6 = zero;
        }
        WitnessCase::BresseCase33 => {
            let (a1, a2) = a12_case33(params, nw);
            let b6 = c(base);
            let denom = (c(2.0 * k3 - l * (k1 + k3) * a1) - mu_k) * n2 + l * l * (k1 - k3);
            alpha1 = b6 * (l * (k1 + k3) * a2 + 1.0 / l) * nw / denom;
            alpha2 = alpha1 * (-(k1 + k3) * nw / k1) + b6 / (l * k1);
            // a1·N·α1 + β6·a2 without the cancelling a1·a2 products.
            let shifted = (c(2.0 * k3) - mu_k) * n2 + l * l * (k1 - k3);
            alpha3 = b6 * (a1 * n2 / l + shifted * a2) / denom;
            beta2 = zero;
            beta4 = zero;
            beta6 = b6;
        }
        WitnessCase::TimoCase1 => {
            let b4 = c(base);
            alpha1 = b4 / (k1 * nw);
            alpha2 = b4 * ((c(k2 - k1) - mu_k) * n2 + k1) / (k1 * k1 * n2);
            alpha3 = zero;
            beta2 = zero;
            beta4 = b4;
            beta6 = zero;
        }
        WitnessCase::TimoCase2 => {
            let d = k1 * nw - 0.5 * k1;
            alpha1 = c(d) / (mu_k * d + 0.25 * k1 * k1);
            alpha2 = alpha1 * (k1 * nw / d);
            alpha3 = zero;
            beta2 = c(1.0);
            beta4 = zero;
            beta6 = zero;
        }
    }
    let alpha4 = if one {
        alpha1 * (delta * lam2 * nw) / den
    } else if case == WitnessCase::TimoCase2 {
        alpha1 * (delta * lam2) / den
    } else {
        zero
    };
    let beta7 = if one || case == WitnessCase::TimoCase2 {
        zero
    } else {
        -i * delta * lambda * alpha1
    };

    // Block coordinates. Order one: φ = α1 cos, ψ = −α2 sin, w = −α3 sin and
    // the ψ, w forcings carry the same sign flip. Order zero: all plus.
    let s = if one { -1.0 } else { 1.0 };
    let md = mech_dim(params.family);
    let bresse = params.family == Family::Bresse;
    let mut disp = vec![alpha1, alpha2 * s];
    let mut force_vel = vec![beta2, beta4 * s];
    if bresse {
        disp.push(alpha3 * s);
        force_vel.push(beta6 * s);
    }
    let iz = Complex64::new(0.0, lambda);
    let mut state = DVector::from_element(md + 1, zero);
    let mut forcing = DVector::from_element(md + 1, zero);
    for (q, u) in disp.iter().enumerate() {
        state[2 * q] = *u;
        state[2 * q + 1] = iz * u;
        forcing[2 * q + 1] = force_vel[q];
    }
    state[md] = alpha4;
    forcing[md] = beta7;

    let (a, g) = fill_core_matrices(params, nw);
    let ac = a.map(c);
    let gc = g.map(c);

    // Resolvent equations: displacement rows, velocity rows, temperature row
    // with the exact memory term, and the transport row sampled in s.
    let mut eq = [0.0f64; 8];
    let ax = &ac * &state;
    let rows = ["phi", "psi", "w"];
    for q in 0..disp.len() {
        let r_disp = iz * state[2 * q] - ax[2 * q];
        let r_vel = iz * state[2 * q + 1] - ax[2 * q + 1] - forcing[2 * q + 1];
        let _ = rows[q];
        eq[2 * q] = r_disp.norm();
        eq[2 * q + 1] = r_vel.norm();
    }
    let theta = state[md];
    let memory = -n2 * (i / lambda) * (mu2 - params.g0()) * theta;
    let r_theta = iz * theta - ax[md] - memory - forcing[md];
    eq[6] = r_theta.norm();
    let mut transport = 0.0f64;
    for k in 0..16 {
        let sv = 0.37 * k as f64;
        let e = (-i * lambda * sv).exp();
        let eta = i / lambda * (e - 1.0) * theta;
        let eta_s = i / lambda * (-i * lambda) * e * theta;
        transport = transport.max((iz * eta + eta_s - theta).norm());
    }
    eq[7] = transport;

    let eta_norm_sq = eta_norm(theta, lambda, nw, &params.kernel)?;
    let mech_energy = state.dotc(&(&gc * &state)).re;
    let phi_norm = (2.0 * mech_energy + eta_norm_sq).sqrt();
    let f_norm = (0.5 * forcing.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
    let residual = eq.iter().copied().fold(0.0, f64::max);

    Ok(WitnessSequence {
        case,
        n,
        wave_number: nw,
        lambda,
        alpha: [alpha1, alpha2, alpha3, alpha4],
        beta: [beta2, beta4, beta6, beta7],
        mu2,
        mu_k,
        denominator_abs: den.norm(),
        state,
        forcing,
        f_norm,
        phi_norm,
        eta_norm_sq,
        equation_residuals: eq,
        residual,
        sup_a3: sup,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessRow {
    pub n: u64,
    pub wave_number: f64,
    pub lambda: f64,
    pub f_norm: f64,
    pub phi_norm: f64,
    pub ratio: f64,
    pub residual: f64,
    pub denominator_abs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub case: WitnessCase,
    pub rows: Vec<WitnessRow>,
    /// Least-squares slope of `ln(‖Φ‖/‖F‖)` against `ln N`.
    pub exponent: f64,
    pub monotone: bool,
    pub last_over_first: f64,
    pub max_f_norm: f64,
    pub sup_a3: Option<f64>,
    pub passed: bool,
}

/// Minimal growth exponent in `N` expected from every case.
pub const MIN_EXPONENT: f64 = 0.9;

/// Tabulates the sequence at `indices` and checks growth and exactness.
pub fn verify_witness(params: &ModelParams, case: WitnessCase, indices: &[u64]) -> Result<GrowthReport> {
    if indices.len() < 3 {
        return Err(precondition("growth check needs at least three indices"));
    }
    check_hypotheses(params, case)?;
    let (base, sup) = normalization(params, case);
    let mut idx = indices.to_vec();
    idx.sort_unstable();
    idx.dedup();
    let seqs: Vec<WitnessSequence> = idx
        .par_iter()
        .map(|&n| build_with_normalization(params, case, n, base, sup))
        .collect::<Result<_>>()?;
    for w in &seqs {
        let tol = RESIDUAL_TOL * (1.0 + w.phi_norm);
        if let Some((k, &r)) = w
            .equation_residuals
            .iter()
            .enumerate()
            .find(|(_, &r)| !(r <= tol))
        {
            return Err(Error::ConstructionBug {
                equation: k + 1,
                residual: r,
                tolerance: tol,
            });
        }
    }
    let rows: Vec<WitnessRow> = seqs
        .iter()
        .map(|w| WitnessRow {
            n: w.n,
            wave_number: w.wave_number,
            lambda: w.lambda,
            f_norm: w.f_norm,
            phi_norm: w.phi_norm,
            ratio: w.phi_norm / w.f_norm,
            residual: w.residual,
            denominator_abs: w.denominator_abs,
        })
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.wave_number.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.ratio.ln()).collect();
    let exponent = slope(&xs, &ys);
    let monotone = rows.windows(2).all(|p| p[1].ratio > p[0].ratio);
    let last_over_first = rows.last().expect("nonempty").ratio / rows[0].ratio;
    let max_f_norm = rows.iter().map(|r| r.f_norm).fold(0.0, f64::max);
    let passed = monotone && exponent >= MIN_EXPONENT && max_f_norm <= 1.0 + 1e-12;
    Ok(GrowthReport {
        case,
        rows,
        exponent,
        monotone,
        last_over_first,
        max_f_norm,
        sup_a3: sup,
        passed,
    })
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Gram matrix of the mechanical and temperature coordinates, for tests and
/// callers that want the energy of a witness in another form.
pub fn core_gram(params: &ModelParams, n_wave: f64) -> DMatrix<f64> {
    fill_core_matrices(params, n_wave).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::PronyKernel;

    fn k2eqk3() -> ModelParams {
        ModelParams::bresse(Coupling::One, 1.0, 2.0, 2.0, 1.0, 1.0, PronyKernel::single(1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn k2_equal_k3_example() {
        let w = build_witness(&k2eqk3(), WitnessCase::BresseK2eqK3, 9).unwrap();
        let n = 10.0 * PI;
        assert!((w.lambda - n * 2f64.sqrt()).abs() < 1e-12);
        assert!((w.alpha[2].re - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!((w.alpha[1].re + 3.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!((w.f_norm * w.f_norm - 0.5).abs() < 1e-14);
        assert!(w.phi_norm >= n / (2.0 * 2f64.sqrt()));
        assert!(w.residual <= 1e-9 * (1.0 + w.phi_norm));
        assert_eq!(w.equation_residuals[7], 0.0);
    }

    #[test]
    fn eta_norm_values() {
        let k = PronyKernel::single(1.0, 1.0).unwrap();
        assert_eq!(eta_norm(Complex64::new(0.0, 0.0), 1.0, PI, &k).unwrap(), 0.0);
        let v = eta_norm(Complex64::new(1.0, 0.0), 1.0, PI, &k).unwrap();
        assert!((v - PI * PI / 2.0).abs() < 1e-14);
        assert!(eta_norm(Complex64::new(1.0, 0.0), 0.0, PI, &k).is_err());
    }

    #[test]
    fn hypotheses_guard() {
        // order-one Timoshenko satisfying the exponential condition
        let t = ModelParams::timoshenko(Coupling::One, 1.0, 2.0, 0.5f64.sqrt(), PronyKernel::single(1.0, 1.0).unwrap())
            .unwrap();
        assert!(matches!(
            build_witness(&t, WitnessCase::TimoCase1, 4),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            build_witness(&k2eqk3(), WitnessCase::BresseCase32, 4),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn too_few_indices() {
        assert!(verify_witness(&k2eqk3(), WitnessCase::BresseK2eqK3, &[1, 2]).is_err());
    }
}
