//! Memory kernels of Prony type.
//!
//! The relaxation kernel is a finite sum of decaying exponentials
//!
//! ```text
//! f(s) = Σ_j c_j exp(-ν_j s),      g(s) = -f'(s) = Σ_j c_j ν_j exp(-ν_j s)
//! ```
//!
//! with every weight `c_j > 0` and every rate `ν_j > 0`. This class is closed
//! under everything the rest of the crate needs: values, moments and Laplace
//! transforms are finite sums, and the memory term of the heat equation
//! reduces to one auxiliary ODE per term. The rate bounds of the kernel
//! (`-μ₂ g ≤ g' ≤ -μ₁ g`) hold with `μ₁ = min ν_j` and `μ₂ = max ν_j`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, KernelError, Result};

/// Structural tolerance on pairwise distinct rates and transform poles.
pub const RATE_TOL: f64 = 1e-12;

/// One exponential term `c exp(-ν s)` of the kernel `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelTerm {
    pub weight: f64,
    pub rate: f64,
}

impl KernelTerm {
    pub const fn new(weight: f64, rate: f64) -> Self {
        KernelTerm { weight, rate }
    }
}

/// Summary produced by [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelReport {
    pub terms: usize,
    pub mu1: f64,
    pub mu2: f64,
    /// `g₀ = ∫ g = f(0)`.
    pub g0: f64,
    /// `g(0) = Σ c_j ν_j`.
    pub g_at_zero: f64,
    /// Largest violation of the sampled rate bounds (non-positive when they hold).
    pub max_bound_excess: f64,
}

/// A validated Prony kernel. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<KernelTerm>", into = "Vec<KernelTerm>")]
pub struct PronyKernel {
    terms: Vec<KernelTerm>,
    f0: f64,
    mu1: f64,
    mu2: f64,
}

impl TryFrom<Vec<KernelTerm>> for PronyKernel {
    type Error = KernelError;

    fn try_from(terms: Vec<KernelTerm>) -> Result<Self, KernelError> {
        check_terms(&terms)?;
        let f0 = terms.iter().map(|t| t.weight).sum();
        let mu1 = terms.iter().map(|t| t.rate).fold(f64::INFINITY, f64::min);
        let mu2 = terms.iter().map(|t| t.rate).fold(0.0, f64::max);
        Ok(PronyKernel {
            terms,
            f0,
            mu1,
            mu2,
        })
    }
}

impl From<PronyKernel> for Vec<KernelTerm> {
    fn from(k: PronyKernel) -> Self {
        k.terms
    }
}

fn check_terms(terms: &[KernelTerm]) -> Result<(), KernelError> {
    if terms.is_empty() {
        return Err(KernelError::Empty);
    }
    for (index, t) in terms.iter().enumerate() {
        if !(t.weight > 0.0 && t.weight.is_finite()) {
            return Err(KernelError::NonPositiveWeight {
                index,
                value: t.weight,
            });
        }
        if !(t.rate > 0.0 && t.rate.is_finite()) {
            return Err(KernelError::NonPositiveRate {
                index,
                value: t.rate,
            });
        }
    }
    for i in 0..terms.len() {
        for j in (i + 1)..terms.len() {
            if (terms[i].rate - terms[j].rate).abs() <= RATE_TOL * terms[i].rate.max(1.0) {
                return Err(KernelError::RepeatedRate {
                    first: i,
                    second: j,
                    rate: terms[i].rate,
                });
            }
        }
    }
    Ok(())
}

impl PronyKernel {
    pub fn new(terms: Vec<KernelTerm>) -> Result<Self, KernelError> {
        Self::try_from(terms)
    }

    /// The single-exponential kernel `f(s) = weight·exp(-rate·s)`.
    pub fn single(weight: f64, rate: f64) -> Result<Self, KernelError> {
        Self::new(vec![KernelTerm::new(weight, rate)])
    }

    pub fn terms(&self) -> &[KernelTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `f(0) = g₀ = Σ c_j`.
    pub fn g0(&self) -> f64 {
        self.f0
    }

    /// `g(0) = Σ c_j ν_j`.
    pub fn g_at_zero(&self) -> f64 {
        self.terms.iter().map(|t| t.weight * t.rate).sum()
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn mu2(&self) -> f64 {
        self.mu2
    }

    fn check_time(s: f64) -> Result<()> {
        if s >= 0.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("kernel evaluated at negative time s = {s}")))
        }
    }

    pub fn f(&self, s: f64) -> Result<f64> {
        Self::check_time(s)?;
        Ok(self.f_unchecked(s))
    }

    pub fn g(&self, s: f64) -> Result<f64> {
        Self::check_time(s)?;
        Ok(self.g_unchecked(s))
    }

    /// `g'(s) = -Σ c_j ν_j² exp(-ν_j s)`.
    pub fn g_prime(&self, s: f64) -> Result<f64> {
        Self::check_time(s)?;
        Ok(self.g_prime_unchecked(s))
    }

    pub(crate) fn f_unchecked(&self, s: f64) -> f64 {
        self.terms.iter().map(|t| t.weight * (-t.rate * s).exp()).sum()
    }

    pub(crate) fn g_unchecked(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.weight * t.rate * (-t.rate * s).exp())
            .sum()
    }

    pub(crate) fn g_prime_unchecked(&self, s: f64) -> f64 {
        -self
            .terms
            .iter()
            .map(|t| t.weight * t.rate * t.rate * (-t.rate * s).exp())
            .sum::<f64>()
    }

    /// Moment `g_m = ∫₀^∞ s^m g(s) ds = Σ c_j m! / ν_j^m`.
    pub fn moment(&self, m: u32) -> f64 {
        let factorial: f64 = (1..=m).map(f64::from).product();
        self.terms
            .iter()
            .map(|t| t.weight * factorial / t.rate.powi(m as i32))
            .sum()
    }

    fn check_pole(&self, z: Complex64) -> Result<()> {
        for t in &self.terms {
            if (z + t.rate).norm() <= RATE_TOL * t.rate.max(1.0) {
                return Err(Error::Pole { z, rate: t.rate });
            }
        }
        Ok(())
    }

    /// Laplace transform `ĝ(z) = Σ c_j ν_j / (ν_j + z)`.
    ///
    /// The sum is the meromorphic continuation of the integral, so it is also
    /// returned for `Re z ≤ -μ₁`; only the poles `z = -ν_j` are rejected.
    pub fn laplace_g(&self, z: Complex64) -> Result<Complex64> {
        self.check_pole(z)?;
        Ok(self
            .terms
            .iter()
            .map(|t| t.weight * t.rate / (z + t.rate))
            .sum())
    }

    /// Laplace transform `f̂(z) = Σ c_j / (ν_j + z)`.
    pub fn laplace_f(&self, z: Complex64) -> Result<Complex64> {
        self.check_pole(z)?;
        Ok(self.terms.iter().map(|t| t.weight / (z + t.rate)).sum())
    }

    /// `ĝ(iλ)` for real `λ`; never hits a pole because every rate is positive.
    pub fn mu2_of(&self, lambda: f64) -> Complex64 {
        let z = Complex64::new(0.0, lambda);
        self.terms
            .iter()
            .map(|t| t.weight * t.rate / (z + t.rate))
            .sum()
    }

    /// Smallest `s` with `∫_s^∞ g = f(s) ≤ rel·g₀`.
    pub fn tail_horizon(&self, rel: f64) -> f64 {
        let target = rel * self.f0;
        // f(s) ≤ g₀ exp(-μ₁ s), so this bracket always contains the root.
        let mut hi = (1.0 / rel).ln() / self.mu1;
        let mut lo = 0.0;
        if self.f_unchecked(hi) > target {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.f_unchecked(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    pub fn report(&self) -> KernelReport {
        const SAMPLES: usize = 1000;
        let s_end = 20.0 / self.mu1;
        let mut worst = f64::NEG_INFINITY;
        for i in 0..SAMPLES {
            let s = s_end * i as f64 / (SAMPLES - 1) as f64;
            let g = self.g_unchecked(s);
            let gp = self.g_prime_unchecked(s);
            // -μ₂ g ≤ g' and g' ≤ -μ₁ g
            worst = worst.max(-self.mu2 * g - gp).max(gp + self.mu1 * g);
        }
        KernelReport {
            terms: self.terms.len(),
            mu1: self.mu1,
            mu2: self.mu2,
            g0: self.f0,
            g_at_zero: self.g_at_zero(),
            max_bound_excess: worst,
        }
    }
}

/// Validates raw kernel terms and samples the rate bounds on a 1000-point grid
/// over `[0, 20/μ₁]` (tolerance `1e-10` absolute).
pub fn validate(terms: &[KernelTerm]) -> Result<KernelReport, KernelError> {
    let kernel = PronyKernel::new(terms.to_vec())?;
    let report = kernel.report();
    if report.max_bound_excess > 1e-10 {
        return Err(KernelError::RateBounds {
            s: f64::NAN,
            excess: report.max_bound_excess,
        });
    }
    Ok(report)
}
