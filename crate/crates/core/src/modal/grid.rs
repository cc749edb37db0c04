use nalgebra::{DMatrix, DVector, LU, Dyn};
use serde::{Deserialize, Serialize};

use super::{fill_core, mech_dim, wave_number, Backend, ModalOperator};
use crate::error::{Error, Result};
use crate::model::{Family, ModelParams};

/// Relative kernel mass allowed beyond the last grid node.
pub const TAIL_TOL: f64 = 1e-10;

fn default_grading() -> f64 {
    8.0
}

/// History grid: `points` cells on `(0, s_max]`, geometrically graded so the
/// last cell is about `e^grading` times the first. `grading = 0` is uniform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub points: usize,
    /// Defaults to the smallest horizon meeting the tail bound.
    #[serde(default)]
    pub s_max: Option<f64>,
    #[serde(default = "default_grading")]
    pub grading: f64,
}

impl GridSpec {
    pub fn new(points: usize) -> Self {
        GridSpec {
            points,
            s_max: None,
            grading: default_grading(),
        }
    }

    /// Cell widths `Δs_1..Δs_S`.
    pub fn widths(&self, s_max: f64) -> Vec<f64> {
        let n = self.points;
        if self.grading == 0.0 {
            return vec![s_max / n as f64; n];
        }
        let r = 1.0 + self.grading / n as f64;
        let h0 = s_max * (r - 1.0) / (r.powi(n as i32) - 1.0);
        (0..n).map(|i| h0 * r.powi(i as i32)).collect()
    }
}

/// Generator of one Fourier mode with the history variable `η` sampled at
/// grid nodes `s_1 < … < s_S` (`η(s_0 = 0) = 0` is eliminated).
///
/// Transport is first-order upwind; the memory integral `∫ g η ds` uses the
/// right-endpoint rule with weights `q_i = Δs_i g(s_i)`. With these choices
/// the discrete energy is dissipated exactly (summation by parts and
/// monotonicity of `g`), so Crank–Nicolson steps never increase it.
///
/// The generator is never formed densely: [`ModalOperator::apply`] and the
/// Crank–Nicolson solver both run in `O(S)`.
#[derive(Debug, Clone)]
pub struct GridBlock {
    pub mode: u64,
    pub wave_number: f64,
    pub family: Family,
    /// Mechanical rows plus the `θ` row without the memory term.
    pub core: DMatrix<f64>,
    pub core_gram: DMatrix<f64>,
    pub widths: Vec<f64>,
    pub nodes: Vec<f64>,
    /// `q_i = Δs_i g(s_i)`.
    pub weights: Vec<f64>,
    pub g_nodes: Vec<f64>,
    pub g_prime_nodes: Vec<f64>,
    pub s_max: f64,
    /// `∫_{s_max}^∞ g = f(s_max)`.
    pub tail_mass: f64,
    /// `|Σ q_i − ∫₀^{s_max} g|`, the quadrature defect of the memory weights.
    pub quadrature_defect: f64,
}

impl GridBlock {
    pub fn assemble(params: &ModelParams, m: u64, spec: &GridSpec) -> Result<Self> {
        if m < 1 {
            return Err(Error::Domain("modes start at m = 1".into()));
        }
        params.validate_structure()?;
        if spec.points == 0 {
            return Err(Error::InvalidParams {
                field: "grid.points",
                reason: "need at least one history node".into(),
            });
        }
        if !(spec.grading >= 0.0 && spec.grading.is_finite()) {
            return Err(Error::InvalidParams {
                field: "grid.grading",
                reason: format!("must be nonnegative, got {}", spec.grading),
            });
        }
        let kernel = &params.kernel;
        let g0 = kernel.g0();
        let required = kernel.tail_horizon(TAIL_TOL);
        let s_max = match spec.s_max {
            None => required,
            Some(s) => {
                if !(s > 0.0) || kernel.f_unchecked(s) > TAIL_TOL * g0 {
                    return Err(Error::TailBound { s_max: s, required });
                }
                s
            }
        };
        let widths = spec.widths(s_max);
        let mut nodes = Vec::with_capacity(widths.len());
        let mut acc = 0.0;
        for w in &widths {
            acc += w;
            nodes.push(acc);
        }
        let g_nodes: Vec<f64> = nodes.iter().map(|&s| kernel.g_unchecked(s)).collect();
        let g_prime_nodes = nodes.iter().map(|&s| kernel.g_prime_unchecked(s)).collect();
        let weights: Vec<f64> = widths.iter().zip(&g_nodes).map(|(w, g)| w * g).collect();
        let tail_mass = kernel.f_unchecked(s_max);
        let quadrature_defect = (weights.iter().sum::<f64>() - (g0 - tail_mass)).abs();

        let n = wave_number(m);
        let md = mech_dim(params.family);
        let mut core = DMatrix::zeros(md + 1, md + 1);
        let mut core_gram = DMatrix::zeros(md + 1, md + 1);
        fill_core(params, n, &mut core, &mut core_gram);
        Ok(GridBlock {
            mode: m,
            wave_number: n,
            family: params.family,
            core,
            core_gram,
            widths,
            nodes,
            weights,
            g_nodes,
            g_prime_nodes,
            s_max,
            tail_mass,
            quadrature_defect,
        })
    }

    pub fn points(&self) -> usize {
        self.widths.len()
    }

    pub fn mech_dim(&self) -> usize {
        mech_dim(self.family)
    }

    pub fn theta_index(&self) -> usize {
        self.mech_dim()
    }

    fn core_dim(&self) -> usize {
        self.core.nrows()
    }

    /// Dense generator and Gram matrix; meant for small grids.
    pub fn to_dense(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let c = self.core_dim();
        let d = self.theta_index();
        let n2 = self.wave_number * self.wave_number;
        let dim = self.dim();
        let mut a = DMatrix::zeros(dim, dim);
        let mut g = DMatrix::zeros(dim, dim);
        a.view_mut((0, 0), (c, c)).copy_from(&self.core);
        g.view_mut((0, 0), (c, c)).copy_from(&self.core_gram);
        for i in 0..self.points() {
            let r = c + i;
            a[(d, r)] = -n2 * self.weights[i];
            a[(r, d)] = 1.0;
            a[(r, r)] = -1.0 / self.widths[i];
            if i > 0 {
                a[(r, r - 1)] = 1.0 / self.widths[i];
            }
            g[(r, r)] = 0.25 * n2 * self.weights[i];
        }
        (a, g)
    }

    fn history<'a>(&self, x: &'a DVector<f64>) -> &'a [f64] {
        &x.as_slice()[self.core_dim()..]
    }

    /// Memory part of the energy, `(N²/4) Σ q_i e_i²`.
    pub fn memory_energy(&self, x: &DVector<f64>) -> f64 {
        let n2 = self.wave_number * self.wave_number;
        0.25 * n2
            * self
                .history(x)
                .iter()
                .zip(&self.weights)
                .map(|(e, q)| q * e * e)
                .sum::<f64>()
    }

    /// Exact `dE/dt` of the semi-discrete system (nonpositive).
    pub fn energy_rate(&self, x: &DVector<f64>) -> f64 {
        let n2 = self.wave_number * self.wave_number;
        let e = self.history(x);
        let s = e.len();
        let mut acc = 0.0;
        let mut prev = 0.0;
        for i in 0..s {
            let jump = e[i] - prev;
            acc += self.g_nodes[i] * jump * jump;
            let next_g = if i + 1 < s { self.g_nodes[i + 1] } else { 0.0 };
            acc += (self.g_nodes[i] - next_g) * e[i] * e[i];
            prev = e[i];
        }
        -0.25 * n2 * acc
    }

    /// Continuum form `(N²/4) Σ Δs_i g'(s_i) e_i²` of the dissipation.
    pub fn continuum_energy_rate(&self, x: &DVector<f64>) -> f64 {
        let n2 = self.wave_number * self.wave_number;
        0.25 * n2
            * self
                .history(x)
                .iter()
                .zip(self.widths.iter().zip(&self.g_prime_nodes))
                .map(|(e, (w, gp))| w * gp * e * e)
                .sum::<f64>()
    }

    /// Crank–Nicolson stepper with time step `h`.
    pub fn crank_nicolson(&self, h: f64) -> Result<CrankNicolson<'_>> {
        CrankNicolson::new(self, h)
    }
}

impl ModalOperator for GridBlock {
    fn mode(&self) -> u64 {
        self.mode
    }
    fn backend(&self) -> Backend {
        Backend::Grid
    }
    fn dim(&self) -> usize {
        self.core_dim() + self.points()
    }
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let c = self.core_dim();
        let d = self.theta_index();
        let n2 = self.wave_number * self.wave_number;
        let mut out = DVector::zeros(self.dim());
        let core_out = &self.core * x.rows(0, c);
        out.rows_mut(0, c).copy_from(&core_out);
        let e = self.history(x);
        let theta = x[d];
        let mut mem = 0.0;
        let mut prev = 0.0;
        for i in 0..e.len() {
            mem += self.weights[i] * e[i];
            out[c + i] = theta - (e[i] - prev) / self.widths[i];
            prev = e[i];
        }
        out[d] -= n2 * mem;
        out
    }
    fn energy(&self, x: &DVector<f64>) -> f64 {
        let c = self.core_dim();
        let xc = x.rows(0, c);
        xc.dot(&(&self.core_gram * xc)) + self.memory_energy(x)
    }
}

/// `(I − h/2 A) x⁺ = (I + h/2 A) x` solved by eliminating the history block,
/// which is lower bidiagonal.
pub struct CrankNicolson<'a> {
    block: &'a GridBlock,
    h: f64,
    core_lu: LU<f64, Dyn, Dyn>,
    /// Diagonal `1 + h/(2Δs_i)` and subdiagonal `−h/(2Δs_i)` of the history block.
    diag: Vec<f64>,
    sub: Vec<f64>,
    /// History response to a unit `θ⁺`.
    unit: Vec<f64>,
}

impl<'a> CrankNicolson<'a> {
    fn new(block: &'a GridBlock, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParams {
                field: "dt",
                reason: format!("time step must be positive, got {h}"),
            });
        }
        let s = block.points();
        let half = 0.5 * h;
        let diag: Vec<f64> = block.widths.iter().map(|w| 1.0 + half / w).collect();
        let sub: Vec<f64> = block.widths.iter().map(|w| -half / w).collect();
        let rhs = vec![half; s];
        let unit = bidiagonal_solve(&diag, &sub, &rhs);
        let c = block.core_dim();
        let d = block.theta_index();
        let n2 = block.wave_number * block.wave_number;
        let mut m = DMatrix::identity(c, c) - &block.core * half;
        let coupling: f64 = block.weights.iter().zip(&unit).map(|(q, u)| q * u).sum();
        m[(d, d)] += half * n2 * coupling;
        Ok(CrankNicolson {
            block,
            h,
            core_lu: m.lu(),
            diag,
            sub,
            unit,
        })
    }

    pub fn dt(&self) -> f64 {
        self.h
    }

    pub fn step(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let b = self.block;
        let c = b.core_dim();
        let d = b.theta_index();
        let n2 = b.wave_number * b.wave_number;
        let half = 0.5 * self.h;
        let rhs = x + b.apply(x) * half;
        let r_e = &rhs.as_slice()[c..];
        let y = bidiagonal_solve(&self.diag, &self.sub, r_e);
        let mut rc = DVector::from_column_slice(&rhs.as_slice()[..c]);
        let qy: f64 = b.weights.iter().zip(&y).map(|(q, v)| q * v).sum();
        rc[d] -= half * n2 * qy;
        let xc = self
            .core_lu
            .solve(&rc)
            .ok_or_else(|| Error::Integration("Crank–Nicolson core matrix is singular".into()))?;
        let theta = xc[d];
        let mut out = DVector::zeros(b.dim());
        out.rows_mut(0, c).copy_from(&xc);
        for i in 0..y.len() {
            out[c + i] = y[i] + self.unit[i] * theta;
        }
        Ok(out)
    }
}

fn bidiagonal_solve(diag: &[f64], sub: &[f64], rhs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(rhs.len());
    let mut prev = 0.0;
    for i in 0..rhs.len() {
        let v = (rhs[i] - if i > 0 { sub[i] * prev } else { 0.0 }) / diag[i];
        out.push(v);
        prev = v;
    }
    out
}
