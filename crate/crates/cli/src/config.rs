//! Run configuration: one JSON document with `model`, `kernel` and
//! `experiment` sections. Unknown keys are rejected everywhere, and every
//! error names the key path it refers to.

use std::path::PathBuf;

use gurtin::dynamics::TimeGrid;
use gurtin::modal::{Backend, GridSpec};
use gurtin::witness::WitnessCase;
use gurtin::{Coupling, Error as CoreError, Family, KernelError, KernelTerm, ModelParams, PronyKernel};
use serde::{Deserialize, Serialize};

use crate::RunError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub kernel: Vec<KernelTerm>,
    pub experiment: Experiment,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Seed for randomized initial data.
    #[serde(default)]
    pub seed: u64,
    /// Size of the worker pool; all cores when absent.
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub family: Family,
    pub k: Coupling,
    pub k1: f64,
    pub k2: f64,
    #[serde(default)]
    pub k3: Option<f64>,
    #[serde(default)]
    pub l: Option<f64>,
    pub delta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    Classify,
    Spectrum(SpectrumKnobs),
    Resolvent(ResolventKnobs),
    Witness(WitnessKnobs),
    Simulate(SimulateKnobs),
    ReportAll(ReportKnobs),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Classify => "classify",
            Experiment::Spectrum(_) => "spectrum",
            Experiment::Resolvent(_) => "resolvent",
            Experiment::Witness(_) => "witness",
            Experiment::Simulate(_) => "simulate",
            Experiment::ReportAll(_) => "report-all",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumKnobs {
    pub m_max: u64,
}

impl Default for SpectrumKnobs {
    fn default() -> Self {
        SpectrumKnobs { m_max: 50 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolventKnobs {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub bins: usize,
}

impl Default for ResolventKnobs {
    fn default() -> Self {
        ResolventKnobs {
            lambda_min: 1.0,
            lambda_max: 100.0,
            bins: 30,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessKnobs {
    pub case: WitnessCase,
    pub indices: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InitialData {
    /// Coefficients decaying like `m⁻³` (displacements) and `m⁻²` (rates).
    #[default]
    Smooth,
    /// Seeded uniform coefficients with the same decay.
    Random,
}

fn default_modes() -> u64 {
    4
}
fn default_sample_every() -> usize {
    1
}
fn default_graph_order() -> u32 {
    1
}
fn default_dissipation_tol() -> f64 {
    1e-4
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateKnobs {
    #[serde(default = "default_modes")]
    pub modes: u64,
    pub t_end: f64,
    pub dt: f64,
    #[serde(default)]
    pub backend: Option<Backend>,
    /// History grid; required by the grid backend.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub data: InitialData,
    /// Keep every `sample_every`-th step in `energy.csv`.
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
    /// Decay fit window; defaults to `[max(2.5, t_end/10), t_end]`.
    #[serde(default)]
    pub fit_window: Option<(f64, f64)>,
    /// Order `m` of the graph norm used by the bound check.
    #[serde(default = "default_graph_order")]
    pub graph_order: u32,
    #[serde(default = "default_dissipation_tol")]
    pub dissipation_tol: f64,
}

impl Default for SimulateKnobs {
    fn default() -> Self {
        SimulateKnobs {
            modes: default_modes(),
            t_end: 50.0,
            dt: 0.05,
            backend: None,
            grid: None,
            data: InitialData::Smooth,
            sample_every: 10,
            fit_window: None,
            graph_order: default_graph_order(),
            dissipation_tol: default_dissipation_tol(),
        }
    }
}

impl SimulateKnobs {
    pub fn backend(&self) -> Backend {
        self.backend.unwrap_or(Backend::Prony)
    }

    pub fn time_grid(&self) -> TimeGrid {
        TimeGrid::new(self.t_end, self.dt)
    }

    pub fn window(&self) -> (f64, f64) {
        self.fit_window.unwrap_or(((self.t_end / 10.0).max(2.5), self.t_end))
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportKnobs {
    #[serde(default)]
    pub spectrum: SpectrumKnobs,
    #[serde(default)]
    pub resolvent: ResolventKnobs,
    #[serde(default)]
    pub simulate: SimulateKnobs,
    #[serde(default)]
    pub witness: Option<WitnessKnobs>,
}

fn cfg(path: impl Into<String>, message: impl Into<String>) -> RunError {
    RunError::Config {
        path: path.into(),
        message: message.into(),
    }
}

fn positive(path: &str, v: f64) -> Result<(), RunError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(cfg(path, format!("must be positive, got {v}")))
    }
}

/// Parses a configuration, reporting the key path of the first problem.
pub fn parse(text: &str) -> Result<RunConfig, RunError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        cfg(if path == "." { "<root>".into() } else { path }, e.into_inner().to_string())
    })?;
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    pub fn kernel(&self) -> Result<PronyKernel, RunError> {
        PronyKernel::new(self.kernel.clone()).map_err(|e| {
            let path = match &e {
                KernelError::Empty => "kernel".to_string(),
                KernelError::NonPositiveWeight { index, .. } => format!("kernel[{index}].weight"),
                KernelError::NonPositiveRate { index, .. } => format!("kernel[{index}].rate"),
                KernelError::RepeatedRate { second, .. } => format!("kernel[{second}].rate"),
                KernelError::RateBounds { .. } => "kernel".to_string(),
            };
            cfg(path, e.to_string())
        })
    }

    pub fn params(&self) -> Result<ModelParams, RunError> {
        let kernel = self.kernel()?;
        let m = &self.model;
        let result = match m.family {
            Family::Bresse => {
                let k3 = m.k3.ok_or_else(|| cfg("model.k3", "required by the Bresse model"))?;
                let l = m.l.ok_or_else(|| cfg("model.l", "required by the Bresse model"))?;
                ModelParams::bresse(m.k, m.k1, m.k2, k3, l, m.delta, kernel)
            }
            Family::Timoshenko => {
                if m.k3.is_some() {
                    return Err(cfg("model.k3", "not used by the Timoshenko model"));
                }
                if m.l.is_some() {
                    return Err(cfg("model.l", "not used by the Timoshenko model"));
                }
                ModelParams::timoshenko(m.k, m.k1, m.k2, m.delta, kernel)
            }
        };
        result.map_err(|e| match e {
            CoreError::InvalidParams { field, reason } => cfg(format!("model.{field}"), reason),
            other => cfg("model", other.to_string()),
        })
    }

    pub fn validate(&self) -> Result<(), RunError> {
        self.params()?;
        if self.workers == Some(0) {
            return Err(cfg("workers", "must be at least 1"));
        }
        match &self.experiment {
            Experiment::Classify => Ok(()),
            Experiment::Spectrum(s) => check_spectrum("experiment", s),
            Experiment::Resolvent(r) => check_resolvent("experiment", r),
            Experiment::Witness(w) => check_witness("experiment", w),
            Experiment::Simulate(s) => check_simulate("experiment", s),
            Experiment::ReportAll(r) => {
                check_spectrum("experiment.spectrum", &r.spectrum)?;
                check_resolvent("experiment.resolvent", &r.resolvent)?;
                check_simulate("experiment.simulate", &r.simulate)?;
                match &r.witness {
                    Some(w) => check_witness("experiment.witness", w),
                    None => Ok(()),
                }
            }
        }
    }
}

fn check_spectrum(at: &str, s: &SpectrumKnobs) -> Result<(), RunError> {
    if s.m_max == 0 {
        return Err(cfg(format!("{at}.m_max"), "must be at least 1"));
    }
    Ok(())
}

fn check_resolvent(at: &str, r: &ResolventKnobs) -> Result<(), RunError> {
    positive(&format!("{at}.lambda_min"), r.lambda_min)?;
    positive(&format!("{at}.lambda_max"), r.lambda_max)?;
    if r.lambda_max <= r.lambda_min {
        return Err(cfg(format!("{at}.lambda_max"), "must exceed lambda_min"));
    }
    if r.bins == 0 {
        return Err(cfg(format!("{at}.bins"), "must be at least 1"));
    }
    Ok(())
}

fn check_witness(at: &str, w: &WitnessKnobs) -> Result<(), RunError> {
    if w.indices.len() < 3 {
        return Err(cfg(format!("{at}.indices"), "need at least three indices"));
    }
    Ok(())
}

fn check_simulate(at: &str, s: &SimulateKnobs) -> Result<(), RunError> {
    if s.modes == 0 {
        return Err(cfg(format!("{at}.modes"), "must be at least 1"));
    }
    positive(&format!("{at}.t_end"), s.t_end)?;
    positive(&format!("{at}.dt"), s.dt)?;
    positive(&format!("{at}.dissipation_tol"), s.dissipation_tol)?;
    if s.dt > s.t_end {
        return Err(cfg(format!("{at}.dt"), "larger than t_end"));
    }
    if s.sample_every == 0 {
        return Err(cfg(format!("{at}.sample_every"), "must be at least 1"));
    }
    match (s.backend(), &s.grid) {
        (Backend::Grid, None) => return Err(cfg(format!("{at}.grid"), "required by the grid backend")),
        (Backend::Grid, Some(g)) if g.points == 0 => {
            return Err(cfg(format!("{at}.grid.points"), "must be at least 1"));
        }
        _ => {}
    }
    if let Some((a, b)) = s.fit_window {
        if !(a > 2.0 && b > a) {
            return Err(cfg(format!("{at}.fit_window"), format!("need 2 < start < end, got [{a}, {b}]")));
        }
    }
    Ok(())
}
