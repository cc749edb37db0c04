use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Coupling;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecayModel {
    /// `C e^(−ωt)`.
    Exponential,
    /// `C t^(−p)`.
    Polynomial,
    /// `C ((ln t)/t)^q (ln t)²`.
    LogPower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitCandidate {
    pub model: DecayModel,
    pub constant: f64,
    /// `ω`, `p` or `q`; never negative.
    pub rate: f64,
    /// Coefficient of determination on `ln E`, clamped to `[0, 1]`.
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub model: DecayModel,
    pub constant: f64,
    pub rate: f64,
    pub r2: f64,
    pub window: (f64, f64),
    pub points: usize,
    pub candidates: Vec<FitCandidate>,
}

fn check_window(window: (f64, f64)) -> Result<()> {
    if !(window.0 > 2.0 && window.1 > window.0 && window.1.is_finite()) {
        return Err(Error::Precondition(format!(
            "fit window must satisfy 2 < t0 < t1 < ∞, got {window:?}"
        )));
    }
    Ok(())
}

/// Samples inside the window, cut at the first non-positive energy.
fn windowed(times: &[f64], energy: &[f64], window: (f64, f64)) -> Vec<(f64, f64)> {
    times
        .iter()
        .zip(energy)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(t, e)| (*t, *e))
        .take_while(|(_, e)| *e >= f64::MIN_POSITIVE)
        .collect()
}

/// Least squares `y = a + b x`, with `b` restricted to `sign·b ≤ 0`.
fn line(xs: &[f64], ys: &[f64], decreasing: bool) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let mut b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    if (decreasing && b > 0.0) || (!decreasing && b < 0.0) {
        b = 0.0;
    }
    (my - b * mx, b)
}

fn candidate(model: DecayModel, pts: &[(f64, f64)]) -> FitCandidate {
    let ln_e: Vec<f64> = pts.iter().map(|(_, e)| e.ln()).collect();
    let (xs, offset): (Vec<f64>, Vec<f64>) = match model {
        DecayModel::Exponential => pts.iter().map(|(t, _)| (*t, 0.0)).unzip(),
        DecayModel::Polynomial => pts.iter().map(|(t, _)| (t.ln(), 0.0)).unzip(),
        DecayModel::LogPower => pts
            .iter()
            .map(|(t, _)| {
                let lt = t.ln();
                ((lt / t).ln(), 2.0 * lt.ln())
            })
            .unzip(),
    };
    let ys: Vec<f64> = ln_e.iter().zip(&offset).map(|(y, o)| y - o).collect();
    // (ln t)/t decreases for t > e, so decay means a positive exponent there.
    let decreasing = model != DecayModel::LogPower;
    let (a, b) = line(&xs, &ys, decreasing);
    let mean = ln_e.iter().sum::<f64>() / ln_e.len() as f64;
    let ss_tot: f64 = ln_e.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    let r2 = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else if ss_res <= f64::EPSILON {
        1.0
    } else {
        0.0
    };
    FitCandidate {
        model,
        constant: a.exp(),
        rate: b.abs(),
        r2,
    }
}

/// Fits the three decay laws to `E(t)` on `window` and keeps the best `R²`.
pub fn fit_decay(times: &[f64], energy: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    check_window(window)?;
    let pts = windowed(times, energy, window);
    if pts.len() < 3 {
        return Err(Error::Precondition(format!(
            "only {} positive samples in the fit window",
            pts.len()
        )));
    }
    let candidates: Vec<FitCandidate> = [DecayModel::Exponential, DecayModel::Polynomial, DecayModel::LogPower]
        .into_iter()
        .map(|m| candidate(m, &pts))
        .collect();
    let best = candidates
        .iter()
        .copied()
        .reduce(|best, c| if c.r2 > best.r2 { c } else { best })
        .expect("three candidates");
    Ok(DecayFit {
        model: best.model,
        constant: best.constant,
        rate: best.rate,
        r2: best.r2,
        window: (pts[0].0, pts[pts.len() - 1].0),
        points: pts.len(),
        candidates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    /// Smallest `C` with `E(t) ≤ C ‖Φ₀‖²_{D(A^m)} ((ln t)/t)^{2m/(24−16k)} (ln t)²`.
    pub constant: f64,
    pub exponent: f64,
    /// Where the bound is tight.
    pub t_at_max: f64,
    pub window: (f64, f64),
    pub passed: bool,
}

/// Certificate constant of the polynomial bound on `window`.
pub fn bound_check(
    times: &[f64],
    energy: &[f64],
    graph_norm: f64,
    m: u32,
    k: Coupling,
    window: (f64, f64),
) -> Result<BoundCheck> {
    check_window(window)?;
    if !(graph_norm > 0.0) {
        return Err(Error::Precondition("bound check needs nonzero data".into()));
    }
    let exponent = 2.0 * m as f64 / (24.0 - 16.0 * k.order() as f64);
    let mut constant = 0.0f64;
    let mut t_at_max = window.0;
    let mut seen = 0usize;
    for (&t, &e) in times.iter().zip(energy) {
        if t < window.0 || t > window.1 {
            continue;
        }
        seen += 1;
        let lt = t.ln();
        let c = e / (graph_norm * graph_norm * (lt / t).powf(exponent) * lt * lt);
        if c > constant {
            constant = c;
            t_at_max = t;
        }
    }
    if seen == 0 {
        return Err(Error::Precondition(format!("no samples in {window:?}")));
    }
    Ok(BoundCheck {
        constant,
        exponent,
        t_at_max,
        window,
        passed: constant.is_finite(),
    })
}
