use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gurtin-lab"));
    c.env_remove("GURTIN_OUT_DIR").env_remove("GURTIN_WORKERS");
    c
}

fn bresse_exponential() -> Value {
    json!({
        "model": {"family": "bresse", "k": 1, "k1": 2.0, "k2": 1.0, "k3": 3.0, "l": 1.0,
                  "delta": 0.5f64.sqrt()},
        "kernel": [{"weight": 1.5, "rate": 1.0}],
        "experiment": {"kind": "classify"}
    })
}

fn timoshenko_report() -> Value {
    json!({
        "model": {"family": "timoshenko", "k": 0, "k1": 1.0, "k2": 1.0, "delta": 1.0},
        "kernel": [{"weight": 1.0, "rate": 1.0}],
        "experiment": {
            "kind": "report-all",
            "spectrum": {"m_max": 12},
            "resolvent": {"lambda_min": 1.0, "lambda_max": 50.0, "bins": 8},
            "simulate": {"modes": 2, "t_end": 10.0, "dt": 0.05, "sample_every": 5}
        },
        "seed": 7
    })
}

/// Writes `config` with `output_dir` inside `tmp` and runs it.
fn run_in(tmp: &Path, name: &str, mut config: Value) -> Output {
    config["output_dir"] = json!(tmp.join(name));
    let path = tmp.join(format!("{name}.json"));
    fs::write(&path, config.to_string()).unwrap();
    bin().arg("run").arg(&path).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn classify_writes_a_verdict() {
    let tmp = TempDir::new().unwrap();
    let out = run_in(tmp.path(), "c", bresse_exponential());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = read_json(&tmp.path().join("c/verdict.json"));
    assert_eq!(v["expected"], "ExponentialStable");
    let m = read_json(&tmp.path().join("c/manifest.json"));
    assert_eq!(m["experiment"], "classify");
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn missing_kernel_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let mut c = bresse_exponential();
    c.as_object_mut().unwrap().remove("kernel");
    let out = run_in(tmp.path(), "c", c);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("kernel"), "{}", stderr(&out));
}

#[test]
fn bad_values_name_their_key() {
    let tmp = TempDir::new().unwrap();
    let mut c = bresse_exponential();
    c["kernel"][0]["rate"] = json!(-1.0);
    let out = run_in(tmp.path(), "c", c);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("kernel[0].rate"), "{}", stderr(&out));

    let mut c = bresse_exponential();
    c["model"]["k1"] = json!(0.0);
    let out = run_in(tmp.path(), "d", c);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("model.k1"), "{}", stderr(&out));
}

#[test]
fn unreadable_config_exits_one() {
    let out = bin().args(["run", "/nonexistent/config.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn inapplicable_witness_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let mut c = bresse_exponential();
    c["experiment"] = json!({"kind": "witness", "case": "BresseK2eqK3", "indices": [1, 2, 4]});
    let out = run_in(tmp.path(), "w", c);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("experiment.case"), "{}", stderr(&out));
}

#[test]
fn witness_run_writes_rows() {
    let tmp = TempDir::new().unwrap();
    let c = json!({
        "model": {"family": "bresse", "k": 1, "k1": 1.0, "k2": 2.0, "k3": 2.0, "l": 1.0, "delta": 1.0},
        "kernel": [{"weight": 1.0, "rate": 1.0}],
        "experiment": {"kind": "witness", "case": "BresseK2eqK3", "indices": [1, 3, 7, 15]}
    });
    let out = run_in(tmp.path(), "w", c);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(tmp.path().join("w/witness.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,wave_number,lambda,f_norm,phi_norm,ratio,residual,denominator_abs"
    );
    assert_eq!(lines.count(), 4);
}

#[test]
fn report_all_writes_every_artifact_with_stable_headers() {
    let tmp = TempDir::new().unwrap();
    let out = run_in(tmp.path(), "r", timoshenko_report());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let dir = tmp.path().join("r");
    for f in [
        "manifest.json",
        "verdict.json",
        "spectrum.csv",
        "spectrum.json",
        "resolvent.csv",
        "resolvent.json",
        "energy.csv",
        "fit.json",
        "spectrum.gp",
        "resolvent.gp",
        "energy.gp",
    ] {
        assert!(dir.join(f).is_file(), "missing {f}");
    }
    let header = |f: &str| fs::read_to_string(dir.join(f)).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header("spectrum.csv"), "m,abscissa,gap,max_relative_residual");
    assert_eq!(header("resolvent.csv"), "lambda,mode,norm,distance,converged,iterations");
    assert_eq!(header("energy.csv"), "t,energy,mode_1,mode_2");

    // Every file the manifest lists exists and matches its digest length.
    let m = read_json(&dir.join("manifest.json"));
    for entry in m["files"].as_array().unwrap() {
        let name = entry["name"].as_str().unwrap();
        let bytes = fs::read(dir.join(name)).unwrap();
        assert_eq!(entry["bytes"].as_u64().unwrap(), bytes.len() as u64, "{name}");
    }
    assert!(m["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn runs_are_reproducible_apart_from_wall_time() {
    let tmp = TempDir::new().unwrap();
    let mut c = timoshenko_report();
    c["experiment"]["simulate"]["data"] = json!("random");
    let path = tmp.path().join("c.json");
    fs::write(&path, c.to_string()).unwrap();
    for name in ["a", "b"] {
        let out = bin().arg("run").arg(&path).env("GURTIN_OUT_DIR", tmp.path().join(name)).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let mut names: Vec<_> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    for n in &names {
        if n == "manifest.json" {
            continue;
        }
        assert_eq!(fs::read(a.join(n)).unwrap(), fs::read(b.join(n)).unwrap(), "{n} differs");
    }
    let mut ma = read_json(&a.join("manifest.json"));
    let mut mb = read_json(&b.join("manifest.json"));
    ma.as_object_mut().unwrap().remove("wall_time_s");
    mb.as_object_mut().unwrap().remove("wall_time_s");
    assert_eq!(ma, mb);
}

#[test]
fn environment_overrides_output_and_workers() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("c.json");
    let mut c = bresse_exponential();
    c["output_dir"] = json!(tmp.path().join("ignored"));
    fs::write(&path, c.to_string()).unwrap();

    let target = tmp.path().join("elsewhere");
    let out = bin()
        .arg("run")
        .arg(&path)
        .env("GURTIN_OUT_DIR", &target)
        .env("GURTIN_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(target.join("verdict.json").is_file());
    assert!(!tmp.path().join("ignored").exists());
    assert_eq!(read_json(&target.join("manifest.json"))["workers"], 2);

    let out = bin().arg("run").arg(&path).env("GURTIN_WORKERS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("GURTIN_WORKERS"));
}

#[test]
fn failed_checks_exit_two_after_writing_artifacts() {
    let tmp = TempDir::new().unwrap();
    let c = json!({
        "model": {"family": "bresse", "k": 0, "k1": 1.0, "k2": 2.0, "k3": 3.0, "l": 0.8, "delta": 1.0},
        "kernel": [{"weight": 1.0, "rate": 1.0}],
        "experiment": {"kind": "simulate", "modes": 2, "t_end": 5.0, "dt": 0.05,
                       "dissipation_tol": 1e-30}
    });
    let out = run_in(tmp.path(), "s", c);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("dissipation"));
    assert!(tmp.path().join("s/energy.csv").is_file());
    assert!(tmp.path().join("s/manifest.json").is_file());
}

#[test]
fn plots_on_an_empty_dir_warn_and_write_nothing() {
    let tmp = TempDir::new().unwrap();
    let out = bin().arg("plots").arg(tmp.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("warning"));
    assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 0);
}

#[test]
fn plots_handle_a_single_row() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("energy.csv"), "t,energy,mode_1\n0e0,2e0,2e0\n").unwrap();
    let out = bin().arg("plots").arg(tmp.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let gp = fs::read_to_string(tmp.path().join("energy.gp")).unwrap();
    assert!(gp.contains("set yrange [1e0:4e0]"), "{gp}");
    assert!(gp.contains("plot 'energy.csv' using 1:2"));
}

#[test]
fn plots_on_a_missing_dir_exit_one() {
    let out = bin().args(["plots", "/nonexistent/dir"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn selftest_single_criterion() {
    let out = bin().args(["selftest", "--only", "6"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("criterion 6 [PASS]"), "{text}");
}
