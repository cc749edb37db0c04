//! Gnuplot scripts for the CSV artifacts. Nothing is rendered here; each
//! script writes a PNG next to its data when run with `gnuplot name.gp`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::RunError;

struct Figure {
    csv: &'static str,
    x: usize,
    y: usize,
    xlabel: &'static str,
    ylabel: &'static str,
    log_x: bool,
    log_y: bool,
}

const FIGURES: [Figure; 4] = [
    Figure {
        csv: "spectrum.csv",
        x: 1,
        y: 3,
        xlabel: "mode m",
        ylabel: "gap -alpha(m)",
        log_x: true,
        log_y: true,
    },
    Figure {
        csv: "resolvent.csv",
        x: 1,
        y: 3,
        xlabel: "lambda",
        ylabel: "resolvent norm",
        log_x: true,
        log_y: true,
    },
    Figure {
        csv: "energy.csv",
        x: 1,
        y: 2,
        xlabel: "t",
        ylabel: "energy",
        log_x: false,
        log_y: true,
    },
    Figure {
        csv: "witness.csv",
        x: 2,
        y: 6,
        xlabel: "N",
        ylabel: "|Phi_n| / |F_n|",
        log_x: true,
        log_y: true,
    },
];

/// Column `col` (1-based) of every data row that parses as a number.
fn column(path: &Path, col: usize) -> Result<Vec<f64>, RunError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| RunError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    })?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| RunError::Io {
            path: path.to_path_buf(),
            source: std::io::Error::other(e),
        })?;
        if let Some(v) = rec.get(col - 1).and_then(|s| s.parse::<f64>().ok()) {
            out.push(v);
        }
    }
    Ok(out)
}

/// `[lo:hi]` covering `values`, widened when the data span a single point.
fn range(values: &[f64], log: bool) -> Option<(f64, f64)> {
    let vals: Vec<f64> = values.iter().copied().filter(|v| v.is_finite() && (!log || *v > 0.0)).collect();
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() {
        return None;
    }
    if lo < hi {
        return Some((lo, hi));
    }
    Some(if log {
        (lo / 2.0, lo * 2.0)
    } else if lo == 0.0 {
        (-1.0, 1.0)
    } else {
        (lo - 0.5 * lo.abs(), lo + 0.5 * lo.abs())
    })
}

fn script(fig: &Figure, xs: &[f64], ys: &[f64]) -> String {
    let png = fig.csv.replace(".csv", ".png");
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str(&format!("set output '{png}'\n"));
    s.push_str(&format!("set xlabel '{}'\nset ylabel '{}'\n", fig.xlabel, fig.ylabel));
    // Log axes only when every value can be drawn on them.
    let log_x = fig.log_x && xs.iter().all(|v| *v > 0.0);
    let log_y = fig.log_y && ys.iter().any(|v| *v > 0.0);
    if log_x {
        s.push_str("set logscale x\n");
    }
    if log_y {
        s.push_str("set logscale y\n");
    }
    if let Some((a, b)) = range(xs, log_x) {
        s.push_str(&format!("set xrange [{a:e}:{b:e}]\n"));
    }
    if let Some((a, b)) = range(ys, log_y) {
        s.push_str(&format!("set yrange [{a:e}:{b:e}]\n"));
    }
    s.push_str(&format!(
        "plot '{}' using {}:{} skip 1 with linespoints notitle\n",
        fig.csv, fig.x, fig.y
    ));
    s
}

/// Scripts for every known CSV in `dir`, as `(file name, contents)`.
pub fn scripts_for(dir: &Path) -> Result<Vec<(String, String)>, RunError> {
    let mut out = Vec::new();
    for fig in &FIGURES {
        let path = dir.join(fig.csv);
        if !path.is_file() {
            continue;
        }
        let xs = column(&path, fig.x)?;
        let ys = column(&path, fig.y)?;
        if xs.is_empty() {
            continue;
        }
        out.push((fig.csv.replace(".csv", ".gp"), script(fig, &xs, &ys)));
    }
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct PlotReport {
    pub written: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

/// Writes one `.gp` script per known CSV in `dir`. Missing or empty CSVs
/// are skipped with a warning.
pub fn emit_plots(dir: &Path) -> Result<PlotReport, RunError> {
    if !dir.is_dir() {
        return Err(RunError::Io {
            path: dir.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        });
    }
    let scripts = scripts_for(dir)?;
    let mut report = PlotReport::default();
    for fig in &FIGURES {
        if !scripts.iter().any(|(n, _)| *n == fig.csv.replace(".csv", ".gp")) {
            report.warnings.push(format!("{} missing or empty; no script", fig.csv));
        }
    }
    for (name, text) in scripts {
        let path = dir.join(&name);
        fs::write(&path, text).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
        report.written.push(path);
    }
    Ok(report)
}
