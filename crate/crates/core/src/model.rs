//! Model parameters and the closed-form stability conditions.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::PronyKernel;

/// Densities are normalized to one.
pub const DENSITY: f64 = 1.0;
/// The beam occupies `(0, LENGTH)`.
pub const LENGTH: f64 = 1.0;

/// Relative tolerance of the algebraic equality conditions.
pub const EQUALITY_TOL: f64 = 1e-9;
/// Default tolerance of the `l ≠ mπ` check, in units of π.
pub const L_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Bresse,
    Timoshenko,
}

/// Order of the thermal coupling: `Zero` couples `θ` with `φ_t`, `One`
/// couples `θ_x` with `φ_xt`. The boundary conditions follow the order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Coupling {
    Zero,
    One,
}

impl Coupling {
    pub fn order(self) -> u8 {
        match self {
            Coupling::Zero => 0,
            Coupling::One => 1,
        }
    }
}

impl TryFrom<u8> for Coupling {
    type Error = String;
    fn try_from(k: u8) -> Result<Self, String> {
        match k {
            0 => Ok(Coupling::Zero),
            1 => Ok(Coupling::One),
            _ => Err(format!("coupling order must be 0 or 1, got {k}")),
        }
    }
}

impl From<Coupling> for u8 {
    fn from(c: Coupling) -> u8 {
        c.order()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub family: Family,
    pub k: Coupling,
    pub k1: f64,
    pub k2: f64,
    /// Unused for Timoshenko.
    #[serde(default)]
    pub k3: f64,
    /// Curvature; zero for Timoshenko.
    #[serde(default)]
    pub l: f64,
    pub delta: f64,
    pub kernel: PronyKernel,
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams {
            field,
            reason: format!("must be positive and finite, got {v}"),
        })
    }
}

impl ModelParams {
    #[allow(clippy::too_many_arguments)]
    pub fn bresse(
        k: Coupling,
        k1: f64,
        k2: f64,
        k3: f64,
        l: f64,
        delta: f64,
        kernel: PronyKernel,
    ) -> Result<Self> {
        let p = ModelParams {
            family: Family::Bresse,
            k,
            k1,
            k2,
            k3,
            l,
            delta,
            kernel,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn timoshenko(k: Coupling, k1: f64, k2: f64, delta: f64, kernel: PronyKernel) -> Result<Self> {
        let p = ModelParams {
            family: Family::Timoshenko,
            k,
            k1,
            k2,
            k3: 0.0,
            l: 0.0,
            delta,
            kernel,
        };
        p.validate()?;
        Ok(p)
    }

    /// Same parameters with another coupling strength. Zero is allowed here:
    /// the uncoupled model is useful as a reference even though it is not a
    /// valid thermoelastic model.
    pub fn with_delta(&self, delta: f64) -> Self {
        ModelParams {
            delta,
            ..self.clone()
        }
    }

    pub fn with_kernel(&self, kernel: PronyKernel) -> Self {
        ModelParams {
            kernel,
            ..self.clone()
        }
    }

    pub fn is_bresse(&self) -> bool {
        self.family == Family::Bresse
    }

    pub fn g0(&self) -> f64 {
        self.kernel.g0()
    }

    /// Checks everything except `δ ≠ 0`; enough to assemble generator blocks.
    pub fn validate_structure(&self) -> Result<()> {
        positive("k1", self.k1)?;
        positive("k2", self.k2)?;
        if !self.delta.is_finite() {
            return Err(Error::InvalidParams {
                field: "delta",
                reason: format!("must be finite, got {}", self.delta),
            });
        }
        match self.family {
            Family::Bresse => {
                positive("k3", self.k3)?;
                positive("l", self.l)?;
            }
            Family::Timoshenko => {
                if self.l != 0.0 {
                    return Err(Error::InvalidParams {
                        field: "l",
                        reason: format!("Timoshenko models have no curvature, got l = {}", self.l),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_structure()?;
        if self.delta == 0.0 {
            return Err(Error::InvalidParams {
                field: "delta",
                reason: "coupling must be nonzero".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConditionId {
    LNotMpi,
    Lpi,
    K2k3,
    K23delta,
    Chi10,
    Chi100,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    NotApplicable,
    /// An equality in `δ²` whose right-hand side is not positive.
    UnsatisfiableForRealDelta,
}

impl Outcome {
    pub fn passed(self) -> bool {
        self == Outcome::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionResult {
    pub outcome: Outcome,
    /// Residual of the condition (distance to the forbidden or required set).
    pub residual: Option<f64>,
    pub detail: String,
}

impl ConditionResult {
    fn na(detail: &str) -> Self {
        ConditionResult {
            outcome: Outcome::NotApplicable,
            residual: None,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NearestViolation {
    pub m: u64,
    /// `l² − r(m)`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expected {
    ExponentialStable,
    PolynomialOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub expected: Expected,
    /// False when no choice of the tested parameters can give exponential
    /// stability (order-zero Bresse coupling).
    pub exponential_admissible: bool,
    pub condition_results: BTreeMap<ConditionId, ConditionResult>,
    pub nearest_violation: Option<NearestViolation>,
    /// For polynomial verdicts, the state norm decays like
    /// `((ln t)/t)^(m·exponent_per_order) · ln t` for data in `D(A^m)`, so
    /// the energy like the square of that.
    pub exponent_per_order: Option<f64>,
}

impl StabilityVerdict {
    pub fn passes(&self, id: ConditionId) -> bool {
        self.condition_results
            .get(&id)
            .is_some_and(|c| c.outcome.passed())
    }
}

/// Fails iff `l` is within `tol·π` of some `mπ`.
pub fn check_l(params: &ModelParams, tol: f64) -> ConditionResult {
    if !params.is_bresse() {
        return ConditionResult::na("no curvature in the Timoshenko model");
    }
    let l = params.l;
    let top = (l / PI).ceil() as u64 + 1;
    let (m, dist) = (0..=top)
        .map(|m| (m, (l - m as f64 * PI).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("range is non-empty");
    let outcome = if dist <= tol * PI { Outcome::Fail } else { Outcome::Pass };
    ConditionResult {
        outcome,
        residual: Some(dist),
        detail: format!("nearest multiple of pi is m = {m}"),
    }
}

/// `r(m) = ((k3 − k2)/k3)(mπ)² − k1/(k1 + k3)`.
pub fn lpi_rhs(params: &ModelParams, m: u64) -> f64 {
    let (k1, k2, k3) = (params.k1, params.k2, params.k3);
    (k3 - k2) / k3 * (m as f64 * PI).powi(2) - k1 / (k1 + k3)
}

/// Curvature that puts mode `m` exactly on the imaginary-eigenvalue set, if
/// one exists.
pub fn lpi_violating_l(k1: f64, k2: f64, k3: f64, m: u64) -> Option<f64> {
    let r = (k3 - k2) / k3 * (m as f64 * PI).powi(2) - k1 / (k1 + k3);
    (r > 0.0).then(|| r.sqrt())
}

/// Fails iff `l² = r(m)` (within `tol·max(1, l²)`) for some integer `m`.
pub fn check_lpi(params: &ModelParams, tol: f64) -> (ConditionResult, Option<NearestViolation>) {
    if !params.is_bresse() {
        return (ConditionResult::na("no curvature in the Timoshenko model"), None);
    }
    let (k1, k2, k3, l) = (params.k1, params.k2, params.k3, params.l);
    let l2 = l * l;
    if k3 <= k2 {
        let nv = NearestViolation {
            m: 0,
            residual: l2 - lpi_rhs(params, 0),
        };
        return (
            ConditionResult {
                outcome: Outcome::Pass,
                residual: Some(nv.residual),
                detail: "k3 <= k2: right-hand side is negative for every m".into(),
            },
            Some(nv),
        );
    }
    let m_star = (k3 * (l2 + k1 / (k1 + k3)) / ((k3 - k2) * PI * PI)).sqrt().round() as u64;
    let nv = [m_star.saturating_sub(1), m_star, m_star + 1]
        .into_iter()
        .map(|m| NearestViolation {
            m,
            residual: l2 - lpi_rhs(params, m),
        })
        .min_by(|a, b| a.residual.abs().total_cmp(&b.residual.abs()))
        .expect("three candidates");
    let outcome = if nv.residual.abs() <= tol * l2.max(1.0) {
        Outcome::Fail
    } else {
        Outcome::Pass
    };
    (
        ConditionResult {
            outcome,
            residual: Some(nv.residual),
            detail: format!("closest integer m = {}", nv.m),
        },
        Some(nv),
    )
}

fn rel_equal(a: f64, b: f64, tol: f64) -> (bool, f64) {
    let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    let r = (a - b).abs() / scale;
    (r <= tol, r)
}

/// `δ² = (kj − k1)(kj − g₀)/kj` for `kj` the given stiffness.
fn delta_condition(delta: f64, k1: f64, kj: f64, g0: f64, label: &str) -> ConditionResult {
    let rhs = (kj - k1) * (kj - g0) / kj;
    let d2 = delta * delta;
    if rhs <= 0.0 {
        return ConditionResult {
            outcome: Outcome::UnsatisfiableForRealDelta,
            residual: Some(d2 - rhs),
            detail: format!("{label} right-hand side {rhs} is not positive"),
        };
    }
    let (ok, r) = rel_equal(d2, rhs, EQUALITY_TOL);
    ConditionResult {
        outcome: if ok { Outcome::Pass } else { Outcome::Fail },
        residual: Some(r),
        detail: format!("delta^2 = {d2}, {label} = {rhs}"),
    }
}

pub fn classify(params: &ModelParams) -> Result<StabilityVerdict> {
    params.validate()?;
    let g0 = params.g0();
    let (k1, k2, k3) = (params.k1, params.k2, params.k3);
    let mut results = BTreeMap::new();
    let mut nearest = None;
    let mut admissible = true;
    let k = params.k.order();

    match params.family {
        Family::Bresse => {
            results.insert(ConditionId::LNotMpi, check_l(params, L_TOL));
            let (lpi, nv) = check_lpi(params, EQUALITY_TOL);
            results.insert(ConditionId::Lpi, lpi);
            nearest = nv;
            results.insert(ConditionId::Chi10, ConditionResult::na("Timoshenko condition"));
            results.insert(ConditionId::Chi100, ConditionResult::na("Timoshenko condition"));
            if params.k == Coupling::One {
                let (same, r) = rel_equal(k2, k3, EQUALITY_TOL);
                results.insert(
                    ConditionId::K2k3,
                    ConditionResult {
                        outcome: if same { Outcome::Fail } else { Outcome::Pass },
                        residual: Some(r),
                        detail: format!("k2 = {k2}, k3 = {k3}"),
                    },
                );
                let c2 = delta_condition(params.delta, k1, k2, g0, "(k2-k1)(k2-g0)/k2");
                let c3 = delta_condition(params.delta, k1, k3, g0, "(k3-k1)(k3-g0)/k3");
                let both = if c2.outcome == Outcome::UnsatisfiableForRealDelta {
                    c2
                } else if c3.outcome == Outcome::UnsatisfiableForRealDelta {
                    c3
                } else {
                    let pass = c2.outcome.passed() && c3.outcome.passed();
                    let residual = c2.residual.unwrap_or(0.0).max(c3.residual.unwrap_or(0.0));
                    ConditionResult {
                        outcome: if pass { Outcome::Pass } else { Outcome::Fail },
                        residual: Some(residual),
                        detail: format!("{}; {}", c2.detail, c3.detail),
                    }
                };
                results.insert(ConditionId::K23delta, both);
            } else {
                admissible = false;
                results.insert(
                    ConditionId::K2k3,
                    ConditionResult::na("order-zero coupling is never exponentially stable"),
                );
                results.insert(
                    ConditionId::K23delta,
                    ConditionResult::na("order-zero coupling is never exponentially stable"),
                );
            }
        }
        Family::Timoshenko => {
            for id in [ConditionId::LNotMpi, ConditionId::Lpi, ConditionId::K2k3, ConditionId::K23delta] {
                results.insert(id, ConditionResult::na("Bresse condition"));
            }
            if params.k == Coupling::One {
                results.insert(
                    ConditionId::Chi10,
                    delta_condition(params.delta, k1, k2, g0, "(k2-k1)(k2-g0)/k2"),
                );
                results.insert(ConditionId::Chi100, ConditionResult::na("order-zero condition"));
            } else {
                results.insert(ConditionId::Chi10, ConditionResult::na("order-one condition"));
                let (a, ra) = rel_equal(k1, k2, EQUALITY_TOL);
                let (b, rb) = rel_equal(k1, g0, EQUALITY_TOL);
                results.insert(
                    ConditionId::Chi100,
                    ConditionResult {
                        outcome: if a && b { Outcome::Pass } else { Outcome::Fail },
                        residual: Some(ra.max(rb)),
                        detail: format!("k1 = {k1}, k2 = {k2}, g0 = {g0}"),
                    },
                );
            }
        }
    }

    let all_pass = results
        .values()
        .filter(|c| c.outcome != Outcome::NotApplicable)
        .all(|c| c.outcome.passed());
    let expected = if admissible && all_pass {
        Expected::ExponentialStable
    } else {
        Expected::PolynomialOnly
    };
    Ok(StabilityVerdict {
        expected,
        exponential_admissible: admissible,
        condition_results: results,
        nearest_violation: nearest,
        exponent_per_order: (expected == Expected::PolynomialOnly)
            .then(|| 1.0 / (24.0 - 16.0 * k as f64)),
    })
}

/// Equal wave speeds `k1 = k2` (reported only).
pub fn equal_speeds(params: &ModelParams) -> bool {
    (params.k1 - params.k2).abs() <= 1e-12 * params.k1.abs().max(1.0)
}
