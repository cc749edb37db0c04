use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gurtin::dynamics::{
    bound_check, dissipation_check, fit_decay, graph_norm_modes, integrate, DissipationReport, EnergyTrace,
    Integrable, TimeGrid,
};
use gurtin::modal::{Backend, GridBlock, ModalState, PronyBlock};
use gurtin::spectra::{abscissa_sweep, resolvent_sweep};
use gurtin::witness::verify_witness;
use gurtin::{classify, ModelParams};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{
    self, Experiment, InitialData, ResolventKnobs, RunConfig, SimulateKnobs, SpectrumKnobs, WitnessKnobs,
};
use crate::{plots, RunError, ENV_OUT_DIR, ENV_WORKERS};

/// What a run produced.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

struct Sink {
    dir: PathBuf,
    files: Vec<String>,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl Sink {
    fn new(dir: PathBuf) -> Result<Self, RunError> {
        fs::create_dir_all(&dir).map_err(io(&dir))?;
        Ok(Sink { dir, files: Vec::new() })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(io(&path))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), RunError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| RunError::Io {
            path: self.dir.join(name),
            source: std::io::Error::other(e),
        };
        w.write_record(header).map_err(err)?;
        for r in rows {
            w.write_record(&r).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| RunError::Io {
            path: self.dir.join(name),
            source: std::io::Error::other(e.to_string()),
        })?;
        self.write(name, &bytes)
    }
}

fn num(v: f64) -> String {
    // Shortest round-trip representation; identical across runs.
    format!("{v:e}")
}

/// Reads, validates and executes the configuration at `path`.
pub fn run(path: &Path) -> Result<RunSummary, RunError> {
    let text = fs::read_to_string(path).map_err(io(path))?;
    let config = config::parse(&text)?;
    run_config(&config, text.as_bytes())
}

/// Executes an already parsed configuration; `raw` is hashed into the manifest.
pub fn run_config(config: &RunConfig, raw: &[u8]) -> Result<RunSummary, RunError> {
    let start = Instant::now();
    let out = std::env::var_os(ENV_OUT_DIR)
        .map(PathBuf::from)
        .unwrap_or_else(|| config.output_dir.clone());
    let workers = match std::env::var(ENV_WORKERS) {
        Ok(v) => Some(v.trim().parse::<usize>().ok().filter(|n| *n > 0).ok_or_else(|| RunError::Config {
            path: ENV_WORKERS.into(),
            message: format!("expected a positive integer, got {v:?}"),
        })?),
        Err(_) => config.workers,
    };
    let params = config.params()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| RunError::Config {
        path: "workers".into(),
        message: e.to_string(),
    })?;
    let mut sink = Sink::new(out)?;
    let checks = pool.install(|| execute(config, &params, &mut sink))?;

    let files: Vec<serde_json::Value> = sink
        .files
        .iter()
        .map(|f| {
            let bytes = fs::read(sink.dir.join(f)).unwrap_or_default();
            json!({"name": f, "bytes": bytes.len(), "sha256": hex::encode(Sha256::digest(&bytes))})
        })
        .collect();
    let manifest = json!({
        "tool": "gurtin-lab",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": gurtin::VERSION,
        "experiment": config.experiment.name(),
        "config_sha256": hex::encode(Sha256::digest(raw)),
        "seed": config.seed,
        "workers": workers,
        "files": files,
        "checks": checks,
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    sink.json("manifest.json", &manifest)?;
    let summary = RunSummary {
        output_dir: sink.dir.clone(),
        files: sink.files.clone(),
        checks,
    };
    let failed: Vec<&Check> = summary.checks.iter().filter(|c| !c.passed).collect();
    if let Some(c) = failed.first() {
        return Err(RunError::Assertion(format!("{}: {}", c.name, c.detail)));
    }
    Ok(summary)
}

fn execute(config: &RunConfig, params: &ModelParams, sink: &mut Sink) -> Result<Vec<Check>, RunError> {
    let mut checks = Vec::new();
    match &config.experiment {
        Experiment::Classify => do_classify(params, sink)?,
        Experiment::Spectrum(k) => checks.extend(do_spectrum(params, k, sink)?),
        Experiment::Resolvent(k) => checks.extend(do_resolvent(params, k, sink)?),
        Experiment::Witness(k) => checks.extend(do_witness(params, k, "experiment", sink)?),
        Experiment::Simulate(k) => checks.extend(do_simulate(params, k, config.seed, "experiment", sink)?),
        Experiment::ReportAll(r) => {
            do_classify(params, sink)?;
            checks.extend(do_spectrum(params, &r.spectrum, sink)?);
            checks.extend(do_resolvent(params, &r.resolvent, sink)?);
            checks.extend(do_simulate(params, &r.simulate, config.seed, "experiment.simulate", sink)?);
            if let Some(w) = &r.witness {
                checks.extend(do_witness(params, w, "experiment.witness", sink)?);
            }
            for (name, text) in plots::scripts_for(&sink.dir)? {
                sink.write(&name, text.as_bytes())?;
            }
        }
    }
    Ok(checks)
}

fn do_classify(params: &ModelParams, sink: &mut Sink) -> Result<(), RunError> {
    let verdict = classify(params)?;
    sink.json("verdict.json", &verdict)
}

fn do_spectrum(params: &ModelParams, k: &SpectrumKnobs, sink: &mut Sink) -> Result<Vec<Check>, RunError> {
    let rep = abscissa_sweep(params, k.m_max)?;
    sink.csv(
        "spectrum.csv",
        &["m", "abscissa", "gap", "max_relative_residual"],
        rep.modes.iter().map(|s| {
            vec![
                s.m.to_string(),
                num(s.abscissa),
                num(-s.abscissa),
                num(s.max_relative_residual()),
            ]
        }),
    )?;
    sink.json(
        "spectrum.json",
        &json!({
            "m_max": k.m_max,
            "global_abscissa": rep.global_abscissa,
            "uniform_gap": rep.uniform_gap,
            "critical_mode": rep.critical_mode,
        }),
    )?;
    Ok(vec![Check {
        name: "spectrum in the closed left half-plane".into(),
        passed: !rep.positive_abscissa,
        detail: format!("largest real part {:e}", rep.global_abscissa),
    }])
}

fn do_resolvent(params: &ModelParams, k: &ResolventKnobs, sink: &mut Sink) -> Result<Vec<Check>, RunError> {
    let sweep = resolvent_sweep(params, k.lambda_min, k.lambda_max, k.bins)?;
    sink.csv(
        "resolvent.csv",
        &["lambda", "mode", "norm", "distance", "converged", "iterations"],
        sweep.samples.iter().map(|s| {
            vec![
                num(s.lambda),
                s.m.to_string(),
                num(s.norm),
                num(s.distance),
                s.converged.to_string(),
                s.iterations.to_string(),
            ]
        }),
    )?;
    sink.json(
        "resolvent.json",
        &json!({
            "lambda_min": k.lambda_min,
            "lambda_max": k.lambda_max,
            "samples": sweep.samples.len(),
            "cap": sweep.cap,
            "median": sweep.median,
            "last_decade_max": sweep.last_decade_max,
        }),
    )?;
    Ok(vec![Check {
        name: "resolvent finite on the sampled axis".into(),
        passed: sweep.cap.is_finite(),
        detail: format!("cap {:e}", sweep.cap),
    }])
}

fn do_witness(params: &ModelParams, k: &WitnessKnobs, at: &str, sink: &mut Sink) -> Result<Vec<Check>, RunError> {
    let rep = verify_witness(params, k.case, &k.indices).map_err(|e| match e {
        gurtin::Error::Precondition(m) => RunError::Config {
            path: format!("{at}.case"),
            message: m,
        },
        other => other.into(),
    })?;
    sink.csv(
        "witness.csv",
        &["n", "wave_number", "lambda", "f_norm", "phi_norm", "ratio", "residual", "denominator_abs"],
        rep.rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                num(r.wave_number),
                num(r.lambda),
                num(r.f_norm),
                num(r.phi_norm),
                num(r.ratio),
                num(r.residual),
                num(r.denominator_abs),
            ]
        }),
    )?;
    sink.json(
        "witness.json",
        &json!({
            "case": rep.case,
            "exponent": rep.exponent,
            "monotone": rep.monotone,
            "last_over_first": rep.last_over_first,
            "max_f_norm": rep.max_f_norm,
            "sup_a3": rep.sup_a3,
            "passed": rep.passed,
        }),
    )?;
    Ok(vec![Check {
        name: "witness growth".into(),
        passed: rep.passed,
        detail: format!("exponent {:.3}, monotone {}", rep.exponent, rep.monotone),
    }])
}

/// Initial coefficients for modes `1..=modes`: mechanical coordinates and
/// temperature, with zero past temperature.
fn initial_core(params: &ModelParams, modes: u64, data: InitialData, seed: u64) -> Vec<Vec<f64>> {
    let md = gurtin::modal::mech_dim(params.family);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..=modes)
        .map(|m| {
            let m = m as f64;
            let mut x = vec![0.0; md + 1];
            for q in 0..md / 2 {
                let (u, v) = match data {
                    InitialData::Smooth => (1.0 + 0.3 * q as f64, 0.5 - 0.2 * q as f64),
                    InitialData::Random => (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                };
                x[2 * q] = u / m.powi(3);
                x[2 * q + 1] = v / m.powi(2);
            }
            x[md] = match data {
                InitialData::Smooth => 0.4,
                InitialData::Random => rng.random_range(-1.0..1.0),
            } / m.powi(2);
            x
        })
        .collect()
}

fn states<B: Integrable>(blocks: &[B], core: &[Vec<f64>], backend: Backend) -> Vec<ModalState> {
    blocks
        .iter()
        .zip(core)
        .map(|(b, c)| {
            let mut x = DVector::zeros(b.dim());
            x.rows_mut(0, c.len()).copy_from_slice(c);
            ModalState {
                mode: b.mode(),
                backend,
                x,
            }
        })
        .collect()
}

fn do_simulate(
    params: &ModelParams,
    k: &SimulateKnobs,
    seed: u64,
    at: &str,
    sink: &mut Sink,
) -> Result<Vec<Check>, RunError> {
    let core = initial_core(params, k.modes, k.data, seed);
    match k.backend() {
        Backend::Prony => {
            let blocks: Vec<PronyBlock> = (1..=k.modes)
                .map(|m| PronyBlock::assemble(params, m))
                .collect::<Result<_, _>>()?;
            let x0 = states(&blocks, &core, Backend::Prony);
            simulate_with(params, &blocks, &x0, k, sink)
        }
        Backend::Grid => {
            let spec = k.grid.expect("validated");
            let blocks: Vec<GridBlock> = (1..=k.modes)
                .map(|m| GridBlock::assemble(params, m, &spec))
                .collect::<Result<_, _>>()
                .map_err(|e| match e {
                    gurtin::Error::TailBound { .. } => RunError::Config {
                        path: format!("{at}.grid.s_max"),
                        message: e.to_string(),
                    },
                    other => other.into(),
                })?;
            let x0 = states(&blocks, &core, Backend::Grid);
            simulate_with(params, &blocks, &x0, k, sink)
        }
    }
}

/// Horizon of the dense run used for the dissipation identity.
const CHECK_HORIZON: f64 = 2.0;
/// Steps per radian of the fastest mode in that run.
const CHECK_RESOLUTION: f64 = 50.0;

/// The identity is checked by differencing sampled energies, which needs
/// many samples per oscillation. The main run may be coarse, so the check
/// uses its own short run from the same data.
fn dense_dissipation<B: Integrable>(
    params: &ModelParams,
    blocks: &[B],
    x0: &[ModalState],
    k: &SimulateKnobs,
) -> Result<(DissipationReport, f64, f64), RunError> {
    let mut omega = 0.0f64;
    for b in blocks {
        let p = PronyBlock::assemble(params, b.mode())?;
        for z in gurtin::linalg::eigenvalues(&p.generator)? {
            omega = omega.max(z.norm());
        }
    }
    let horizon = k.t_end.min(CHECK_HORIZON);
    let dt = k.dt.min(1.0 / (CHECK_RESOLUTION * omega.max(1.0)));
    let steps = (horizon / dt).ceil().max(8.0);
    let dt = horizon / steps;
    let grid = TimeGrid::new(horizon, dt).with_stride(steps as usize);
    let traj = integrate(blocks, x0, grid)?;
    Ok((dissipation_check(&traj), dt, horizon))
}

fn simulate_with<B: Integrable>(
    params: &ModelParams,
    blocks: &[B],
    x0: &[ModalState],
    k: &SimulateKnobs,
    sink: &mut Sink,
) -> Result<Vec<Check>, RunError> {
    let norms: Vec<(u32, f64)> = (0..=k.graph_order).map(|m| (m, graph_norm_modes(blocks, x0, m))).collect();
    let traj = integrate(blocks, x0, k.time_grid().with_stride(k.sample_every))?;
    let trace = EnergyTrace::from_trajectory(&traj, norms.clone());
    let thin = trace.thinned(k.sample_every);
    let mut header = vec!["t".to_string(), "energy".to_string()];
    header.extend(thin.per_mode.iter().map(|(m, _)| format!("mode_{m}")));
    let header_ref: Vec<&str> = header.iter().map(String::as_str).collect();
    sink.csv(
        "energy.csv",
        &header_ref,
        (0..thin.times.len()).map(|i| {
            let mut row = vec![num(thin.times[i]), num(thin.total[i])];
            row.extend(thin.per_mode.iter().map(|(_, e)| num(e[i])));
            row
        }),
    )?;

    let (diss, check_dt, check_t) = dense_dissipation(params, blocks, x0, k)?;
    let window = k.window();
    let fit = if k.t_end > window.0 {
        fit_decay(&trace.times, &trace.total, window).ok()
    } else {
        None
    };
    let graph = norms.last().map(|n| n.1).unwrap_or(0.0);
    let bound = if k.t_end > window.0 && graph > 0.0 {
        bound_check(&trace.times, &trace.total, graph, k.graph_order, params.k, window).ok()
    } else {
        None
    };
    let e0 = trace.total.first().copied().unwrap_or(0.0);
    let e_end = trace.total.last().copied().unwrap_or(0.0);
    let label = match trace.backend {
        Backend::Prony => "reduced",
        Backend::Grid => "full",
    };
    sink.json(
        "fit.json",
        &json!({
            "backend": trace.backend,
            "energy_label": label,
            "window": window,
            "fit": fit,
            "bound": bound,
            "dissipation": diss,
            "dissipation_dt": check_dt,
            "dissipation_horizon": check_t,
            "graph_norms": norms,
            "energy_start": e0,
            "energy_end": e_end,
            "max_increase": trace.max_increase(),
        }),
    )?;
    let violation = match trace.backend {
        Backend::Prony => diss.max_violation,
        Backend::Grid => diss.discrete_violation,
    };
    Ok(vec![
        Check {
            name: "energy nonincreasing".into(),
            passed: trace.max_increase() <= gurtin::dynamics::ENERGY_TOL,
            detail: format!("largest rise {:e} E(0)", trace.max_increase()),
        },
        Check {
            name: "dissipation identity".into(),
            passed: violation <= k.dissipation_tol,
            detail: format!("violation {violation:e} (tolerance {:e})", k.dissipation_tol),
        },
    ])
}
