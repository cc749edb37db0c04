//! Spectra, resolvents and contraction certificates of Prony blocks.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::modal::PronyBlock;
use crate::model::{Family, ModelParams};

/// Real parts above this are a dissipativity violation.
pub const POSITIVE_TOL: f64 = 1e-10;
/// Resolvent points closer than this (relative to `max(1, ‖A‖)`) to the
/// spectrum are rejected.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Spectrum of one block.
#[derive(Debug, Clone, Serialize)]
pub struct ModeSpectrum {
    pub m: u64,
    pub eigenvalues: Vec<Complex64>,
    /// `‖A v − λ v‖` for each refined eigenvector.
    pub residuals: Vec<f64>,
    /// Frobenius norm of the block.
    pub norm: f64,
    /// `α(m) = max Re λ`.
    pub abscissa: f64,
}

impl ModeSpectrum {
    pub fn distance_to(&self, z: Complex64) -> f64 {
        self.eigenvalues
            .iter()
            .map(|e| (e - z).norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn nearest(&self, z: Complex64) -> Option<Complex64> {
        self.eigenvalues
            .iter()
            .copied()
            .min_by(|a, b| (a - z).norm().total_cmp(&(b - z).norm()))
    }

    pub fn max_relative_residual(&self) -> f64 {
        let s = self.norm.max(f64::MIN_POSITIVE);
        self.residuals.iter().fold(0.0, |m, r| m.max(r / s))
    }
}

pub fn block_spectrum(block: &PronyBlock) -> Result<ModeSpectrum> {
    let e = linalg::eigen(&block.generator)?;
    let abscissa = e.max_real();
    Ok(ModeSpectrum {
        m: block.mode,
        eigenvalues: e.values,
        residuals: e.residuals,
        norm: e.norm,
        abscissa,
    })
}

/// Largest distance between an eigenvalue and the conjugate of its nearest
/// partner; zero for an exactly conjugate-symmetric list.
pub fn conjugate_defect(values: &[Complex64]) -> f64 {
    values
        .iter()
        .map(|z| {
            values
                .iter()
                .map(|w| (w - z.conj()).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub modes: Vec<ModeSpectrum>,
    /// `sup_m α(m)`.
    pub global_abscissa: f64,
    /// `inf_m (−α(m))`: positive means a uniform gap on the computed range.
    pub uniform_gap: f64,
    /// Mode attaining the smallest gap.
    pub critical_mode: u64,
    /// Some `α(m) > POSITIVE_TOL` (never expected).
    pub positive_abscissa: bool,
}

impl SpectrumReport {
    pub fn abscissa(&self, m: u64) -> Option<f64> {
        self.modes.iter().find(|s| s.m == m).map(|s| s.abscissa)
    }

    pub fn trend(&self) -> Vec<(u64, f64)> {
        self.modes.iter().map(|s| (s.m, s.abscissa)).collect()
    }
}

/// Spectra of modes `1..=m_max`, computed in parallel and reported in mode order.
pub fn abscissa_sweep(params: &ModelParams, m_max: u64) -> Result<SpectrumReport> {
    if m_max < 1 {
        return Err(Error::InvalidParams {
            field: "m_max",
            reason: "need at least one mode".into(),
        });
    }
    let modes: Vec<ModeSpectrum> = (1..=m_max)
        .into_par_iter()
        .map(|m| PronyBlock::assemble(params, m).and_then(|b| block_spectrum(&b)))
        .collect::<Result<_>>()?;
    let (critical_mode, global_abscissa) = modes
        .iter()
        .map(|s| (s.m, s.abscissa))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    Ok(SpectrumReport {
        global_abscissa,
        uniform_gap: -global_abscissa,
        critical_mode,
        positive_abscissa: global_abscissa > POSITIVE_TOL,
        modes,
    })
}

/// Factorized `zI − A` together with its adjoint, for repeated solves.
pub struct Resolvent<'a> {
    block: &'a PronyBlock,
    z: Complex64,
    lu: LU<Complex64, Dyn, Dyn>,
    lu_adjoint: LU<Complex64, Dyn, Dyn>,
    /// Distance from `z` to the computed spectrum.
    pub distance: f64,
}

fn complexify(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    a.map(|v| Complex64::new(v, 0.0))
}

impl<'a> Resolvent<'a> {
    pub fn new(block: &'a PronyBlock, z: Complex64) -> Result<Self> {
        let spectrum = linalg::eigenvalues(&block.generator)?;
        Self::with_spectrum(block, z, &spectrum)
    }

    pub fn with_spectrum(block: &'a PronyBlock, z: Complex64, spectrum: &[Complex64]) -> Result<Self> {
        let distance = spectrum
            .iter()
            .map(|e| (e - z).norm())
            .fold(f64::INFINITY, f64::min);
        let scale = block.generator.norm().max(1.0);
        if distance <= SINGULAR_TOL * scale {
            return Err(Error::SingularResolvent { lambda: z, distance });
        }
        let n = block.generator.nrows();
        let a = complexify(&block.generator);
        let shifted = DMatrix::<Complex64>::identity(n, n) * z - &a;
        let adjoint = shifted.adjoint();
        Ok(Resolvent {
            block,
            z,
            lu: shifted.lu(),
            lu_adjoint: adjoint.lu(),
            distance,
        })
    }

    /// `(zI − A)⁻¹ f`.
    pub fn solve(&self, f: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        self.lu.solve(f).ok_or(Error::SingularResolvent {
            lambda: self.z,
            distance: self.distance,
        })
    }

    /// `(zI − A)⁻ᴴ f`.
    pub fn solve_adjoint(&self, f: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        self.lu_adjoint.solve(f).ok_or(Error::SingularResolvent {
            lambda: self.z,
            distance: self.distance,
        })
    }

    pub fn block(&self) -> &PronyBlock {
        self.block
    }
}

/// Solves `(z − A) x = f` and certifies the residual.
pub fn resolvent_solve(block: &PronyBlock, z: Complex64, f: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    if f.len() != block.generator.nrows() {
        return Err(Error::Shape(format!(
            "forcing has length {}, block has dimension {}",
            f.len(),
            block.generator.nrows()
        )));
    }
    let r = Resolvent::new(block, z)?;
    let x = r.solve(f)?;
    let a = complexify(&block.generator);
    let res = (&x * z - &a * &x - f).norm();
    let bound = 1e-10 * (f.norm() + block.generator.norm() * x.norm());
    if res > bound {
        return Err(Error::SingularResolvent {
            lambda: z,
            distance: r.distance,
        });
    }
    Ok(x)
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolventSample {
    pub lambda: f64,
    pub m: u64,
    /// Estimate of `‖(iλ − A_m)⁻¹‖` in the energy norm; a lower bound of the
    /// true value, sharp when `converged`.
    pub norm: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `dist(iλ, σ(A_m))`.
    pub distance: f64,
}

const POWER_TOL: f64 = 1e-6;
const POWER_MAX: usize = 200;

fn g_inner(g: &DMatrix<f64>, x: &DVector<Complex64>, y: &DVector<Complex64>) -> Complex64 {
    let gy = complexify(g) * y;
    x.dotc(&gy)
}

/// Power iteration on `R^♯R` with `R^♯ = G⁻¹ Rᴴ G` the energy-adjoint.
pub fn resolvent_norm(block: &PronyBlock, lambda: f64) -> Result<ResolventSample> {
    let spectrum = linalg::eigen(&block.generator)?;
    resolvent_norm_with(block, lambda, &spectrum)
}

pub(crate) fn resolvent_norm_with(block: &PronyBlock, lambda: f64, spectrum: &linalg::Eigen) -> Result<ResolventSample> {
    let z = Complex64::new(0.0, lambda);
    let r = Resolvent::with_spectrum(block, z, &spectrum.values)?;
    let g = &block.gram;
    let gc = complexify(g);
    let chol = Cholesky::new(g.clone())
        .ok_or_else(|| Error::Precondition("Gram matrix is not positive definite".into()))?;
    let g_inv = complexify(&chol.inverse());
    let n = g.nrows();

    // Start from the eigenvector closest to iλ plus a small generic component.
    let near = spectrum
        .values
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - z).norm().total_cmp(&(b.1 - z).norm()))
        .map(|(i, _)| i);
    let mut x = DVector::from_fn(n, |i, _| Complex64::new(1e-3 * (1.0 + 0.37 * i as f64).sin(), 0.0));
    if let Some(i) = near {
        x += &spectrum.vectors[i];
    }
    let norm_g = |v: &DVector<Complex64>| g_inner(g, v, v).re.max(0.0).sqrt();
    let xn = norm_g(&x);
    x /= Complex64::new(xn, 0.0);

    let mut best = 0.0f64;
    let mut prev = 0.0f64;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=POWER_MAX {
        iterations = it;
        let y = r.solve(&x)?;
        let ratio = norm_g(&y);
        best = best.max(ratio);
        if it > 1 && (ratio - prev).abs() <= POWER_TOL * ratio {
            converged = true;
            break;
        }
        prev = ratio;
        // x ← R^♯ R x = G⁻¹ Rᴴ G y
        let w = r.solve_adjoint(&(&gc * &y))?;
        let mut next = &g_inv * w;
        let nn = norm_g(&next);
        if nn == 0.0 || !nn.is_finite() {
            break;
        }
        next /= Complex64::new(nn, 0.0);
        x = next;
    }
    Ok(ResolventSample {
        lambda,
        m: block.mode,
        norm: best,
        converged,
        iterations,
        distance: r.distance,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionReport {
    pub passed: bool,
    pub tolerance: f64,
    /// `‖AᵀG + GA + D‖` for Prony blocks.
    pub identity_defect: f64,
}

/// Checks that `−(AᵀG + GA) + tol·I` admits a Cholesky factorization, with
/// `tol = 1e-10·max(1, ‖A‖‖G‖)`.
pub fn contraction_check_matrices(a: &DMatrix<f64>, g: &DMatrix<f64>) -> (bool, f64) {
    let n = a.nrows();
    let tol = 1e-10 * (a.norm() * g.norm()).max(1.0);
    let sym = a.transpose() * g + g * a;
    let m = -sym + DMatrix::<f64>::identity(n, n) * tol;
    let m = (&m + m.transpose()) * 0.5;
    (Cholesky::new(m).is_some(), tol)
}

pub fn contraction_check(block: &PronyBlock) -> ContractionReport {
    let (passed, tolerance) = contraction_check_matrices(&block.generator, &block.gram);
    ContractionReport {
        passed,
        tolerance,
        identity_defect: block.identity_defect(),
    }
}

/// Purely imaginary eigenvalue predicted for mode `m` when the curvature is
/// tuned to violate the `l² ≠ r(m)` condition:
/// `λ* = mπ·sqrt((k2 l²(k1+k3) + k1k3)/(l²(k1+k3) + k1))`.
pub fn predicted_imaginary_eigenvalue(params: &ModelParams, m: u64) -> f64 {
    let (k1, k2, k3, l) = (params.k1, params.k2, params.k3, params.l);
    let l2 = l * l;
    m as f64 * PI * ((k2 * l2 * (k1 + k3) + k1 * k3) / (l2 * (k1 + k3) + k1)).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct ImaginaryAxisProbe {
    pub m: u64,
    pub lambda_star: f64,
    pub nearest: Complex64,
    pub distance: f64,
}

/// For each mode, the distance from `iλ*(m)` to the block spectrum.
pub fn imaginary_axis_probe(params: &ModelParams, modes: &[u64]) -> Result<Vec<ImaginaryAxisProbe>> {
    if params.family != Family::Bresse {
        return Err(Error::Precondition("the imaginary-eigenvalue probe is defined for Bresse models".into()));
    }
    modes
        .par_iter()
        .map(|&m| {
            let block = PronyBlock::assemble(params, m)?;
            let spec = block_spectrum(&block)?;
            let lambda_star = predicted_imaginary_eigenvalue(params, m);
            let z = Complex64::new(0.0, lambda_star);
            let nearest = spec.nearest(z).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            Ok(ImaginaryAxisProbe {
                m,
                lambda_star,
                nearest,
                distance: (nearest - z).norm(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolventSweep {
    /// Largest per-mode norm at each sampled `λ`.
    pub samples: Vec<ResolventSample>,
    pub cap: f64,
    pub median: f64,
    /// Largest norm over the last decade of the `λ` range.
    pub last_decade_max: f64,
}

/// Spectra of all modes whose mechanical frequencies reach `λ_max`.
fn sweep_modes(params: &ModelParams, lambda_max: f64) -> u64 {
    let mut speeds = vec![params.k1, params.k2];
    if params.is_bresse() {
        speeds.push(params.k3);
    }
    let slowest = speeds.into_iter().fold(f64::INFINITY, f64::min).sqrt();
    (lambda_max / (PI * slowest)).ceil() as u64 + 10
}

/// Logarithmic sweep of `sup_m ‖(iλ − A_m)⁻¹‖` over `[lambda_min, lambda_max]`.
///
/// The range is cut into `bins` logarithmic bins. Each bin is sampled at its
/// endpoints and at the imaginary parts of block eigenvalues inside it, where
/// the resolvent peaks. At each sample only modes whose spectrum comes within
/// `4·d_min + 1` of `iλ` are evaluated, `d_min` being the smallest distance
/// over all modes.
pub fn resolvent_sweep(params: &ModelParams, lambda_min: f64, lambda_max: f64, bins: usize) -> Result<ResolventSweep> {
    if !(lambda_min > 0.0 && lambda_max > lambda_min) || bins == 0 {
        return Err(Error::InvalidParams {
            field: "resolvent.lambda",
            reason: format!("need 0 < min < max and bins > 0, got [{lambda_min}, {lambda_max}] with {bins} bins"),
        });
    }
    let m_hi = sweep_modes(params, lambda_max);
    let blocks: Vec<PronyBlock> = (1..=m_hi)
        .map(|m| PronyBlock::assemble(params, m))
        .collect::<Result<_>>()?;
    let spectra: Vec<linalg::Eigen> = blocks
        .par_iter()
        .map(|b| linalg::eigen(&b.generator))
        .collect::<Result<_>>()?;

    let (lo, hi) = (lambda_min.ln(), lambda_max.ln());
    let edges: Vec<f64> = (0..=bins).map(|i| (lo + (hi - lo) * i as f64 / bins as f64).exp()).collect();
    let mut points: Vec<f64> = edges.clone();
    for s in &spectra {
        for z in &s.values {
            if z.im >= lambda_min && z.im <= lambda_max {
                points.push(z.im);
            }
        }
    }
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs());

    let samples: Vec<ResolventSample> = points
        .par_iter()
        .map(|&lambda| {
            let z = Complex64::new(0.0, lambda);
            let dists: Vec<f64> = spectra
                .iter()
                .map(|s| s.values.iter().map(|e| (e - z).norm()).fold(f64::INFINITY, f64::min))
                .collect();
            let dmin = dists.iter().copied().fold(f64::INFINITY, f64::min);
            let mut best: Option<ResolventSample> = None;
            for (i, d) in dists.iter().enumerate() {
                if *d > 4.0 * dmin + 1.0 {
                    continue;
                }
                let s = resolvent_norm_with(&blocks[i], lambda, &spectra[i])?;
                if best.as_ref().is_none_or(|b| s.norm > b.norm) {
                    best = Some(s);
                }
            }
            best.ok_or_else(|| Error::Precondition("no mode selected".into()))
        })
        .collect::<Result<_>>()?;

    let cap = samples.iter().map(|s| s.norm).fold(0.0, f64::max);
    let mut norms: Vec<f64> = samples.iter().map(|s| s.norm).collect();
    norms.sort_by(f64::total_cmp);
    let median = if norms.len() % 2 == 1 {
        norms[norms.len() / 2]
    } else {
        0.5 * (norms[norms.len() / 2 - 1] + norms[norms.len() / 2])
    };
    let decade = lambda_max / 10.0;
    let last_decade_max = samples
        .iter()
        .filter(|s| s.lambda >= decade)
        .map(|s| s.norm)
        .fold(0.0, f64::max);
    Ok(ResolventSweep {
        samples,
        cap,
        median,
        last_decade_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::PronyKernel;
    use crate::model::Coupling;

    fn timo_heat() -> ModelParams {
        ModelParams::timoshenko(Coupling::One, 1.0, 1.0, 1.0, PronyKernel::single(1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn heat_only_subblock() {
        // δ = 0: θ and v decouple; λ² + λ + π² = 0
        let p = timo_heat().with_delta(0.0);
        let b = PronyBlock::assemble(&p, 1).unwrap();
        let s = block_spectrum(&b).unwrap();
        let disc = Complex64::new(1.0 - 4.0 * PI * PI, 0.0).sqrt();
        for root in [(-1.0 + disc) / 2.0, (-1.0 - disc) / 2.0] {
            assert!(s.distance_to(root) < 1e-12, "{root}");
        }
        assert!(s.abscissa.abs() < 1e-12);
    }

    #[test]
    fn sweep_is_ordered_and_dissipative() {
        let r = abscissa_sweep(&timo_heat(), 12).unwrap();
        assert_eq!(r.modes.iter().map(|s| s.m).collect::<Vec<_>>(), (1..=12).collect::<Vec<_>>());
        assert!(!r.positive_abscissa);
        for s in &r.modes {
            assert!(conjugate_defect(&s.eigenvalues) <= 1e-10 * s.norm);
            assert!(s.max_relative_residual() <= 1e-8);
        }
    }

    #[test]
    fn resolvent_zero_forcing() {
        let b = PronyBlock::assemble(&timo_heat(), 1).unwrap();
        let f = DVector::zeros(b.generator.nrows());
        let x = resolvent_solve(&b, Complex64::new(0.0, 2.0), &f).unwrap();
        assert_eq!(x.norm(), 0.0);
    }

    #[test]
    fn resolvent_on_eigenvalue_fails() {
        let p = timo_heat().with_delta(0.0);
        let b = PronyBlock::assemble(&p, 1).unwrap();
        let ev = block_spectrum(&b).unwrap().eigenvalues[0];
        let f = DVector::from_element(b.generator.nrows(), Complex64::new(1.0, 0.0));
        assert!(matches!(resolvent_solve(&b, ev, &f), Err(Error::SingularResolvent { .. })));
    }

    #[test]
    fn contraction_and_violation() {
        let b = PronyBlock::assemble(&timo_heat(), 3).unwrap();
        assert!(contraction_check(&b).passed);
        let mut bad = b.clone();
        let v = bad.generator.nrows() - 1;
        bad.generator[(v, v)] = -bad.generator[(v, v)];
        assert!(!contraction_check(&bad).passed);
    }

    #[test]
    fn norm_bounds_far_from_spectrum() {
        let b = PronyBlock::assemble(&timo_heat(), 1).unwrap();
        let s = resolvent_norm(&b, 40.0).unwrap();
        let chol_g = b.gram.clone().symmetric_eigenvalues();
        let kappa = chol_g.max() / chol_g.min();
        assert!(s.norm >= 1.0 / s.distance * (1.0 - 1e-6));
        assert!(s.norm <= kappa.sqrt() / s.distance * (1.0 + 1e-6));
    }
}
