use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn fkm(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fkm"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn ok(o: &Output) {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn build_graph_and_manifest_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let o = fkm(&["build-graph", "--fractal", "sg", "--level", "2"], dir.path());
    ok(&o);
    let g = json(&dir.path().join("graph.json"));
    assert_eq!(g["vertices"].as_array().unwrap().len(), 15);
    assert_eq!(g["edges"].as_array().unwrap().len(), 27);
    let m = json(&dir.path().join("manifest.json"));
    assert_eq!(m["command"], "build-graph");
    for a in m["artifacts"].as_array().unwrap() {
        let bytes = fs::read(dir.path().join(a["path"].as_str().unwrap())).unwrap();
        assert_eq!(a["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
    let s = json(&dir.path().join("structure.json"));
    assert_eq!(s["weights"].as_array().unwrap().len(), 3);
}

#[test]
fn harmonic_unit_energy() {
    let dir = tempfile::tempdir().unwrap();
    ok(&fkm(
        &["harmonic", "--level", "4", "--boundary", "0,0,1", "--svg"],
        dir.path(),
    ));
    let e = json(&dir.path().join("energy.json"));
    assert!((e["energy"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(dir.path().join("harmonic.svg").exists());
}

#[test]
fn harmonic_zero_and_ring_constant() {
    let dir = tempfile::tempdir().unwrap();
    ok(&fkm(&["harmonic", "--level", "3", "--boundary", "0,0,0"], dir.path()));
    let csv = fs::read_to_string(dir.path().join("harmonic.csv")).unwrap();
    assert!(csv
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap() == 0.0));

    let ring = tempfile::tempdir().unwrap();
    ok(&fkm(
        &[
            "harmonic",
            "--fractal",
            "ring",
            "--level",
            "4",
            "--boundary",
            "0.25,1,2",
        ],
        ring.path(),
    ));
    let csv = fs::read_to_string(ring.path().join("harmonic.csv")).unwrap();
    let vals: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(vals.len(), 16);
    assert!(vals.iter().all(|&v| v == 0.25));
}

#[test]
fn bad_boundary_is_single_line_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = fkm(&["harmonic", "--level", "3", "--boundary", "0,x,1"], dir.path());
    assert!(!o.status.success());
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error: bad-boundary: "), "{err}");
}

#[test]
fn usage_errors_are_single_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = fkm(&["twist", "--level", "nope"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error: usage: "), "{err}");
}

#[test]
fn unresolved_winding_suggests_finer_level() {
    let dir = tempfile::tempdir().unwrap();
    let o = fkm(&["twist", "--degree", "3", "--level", "1"], dir.path());
    assert!(!o.status.success());
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.starts_with("error: unresolved-winding: "), "{err}");
    assert!(err.contains("--level 2"), "{err}");
}

#[test]
fn twist_degree_one() {
    let dir = tempfile::tempdir().unwrap();
    ok(&fkm(
        &["twist", "--degree", "1", "--level", "4", "--trajectory", "100"],
        dir.path(),
    ));
    let r = json(&dir.path().join("equilibrium.json"));
    assert_eq!(r["report"]["stability"], "stable");
    assert_eq!(r["report"]["degree"]["eps"], 1);
    assert!(r["report"]["residual"].as_f64().unwrap() < 1e-10);
    let svg = fs::read_to_string(dir.path().join("twist.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(fs::read_to_string(dir.path().join("trajectory.csv"))
        .unwrap()
        .starts_with("time,energy,residual"));
}

#[test]
fn twist_degree_zero_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    ok(&fkm(&["twist", "--degree", "0", "--level", "3"], dir.path()));
    let r = json(&dir.path().join("equilibrium.json"));
    assert_eq!(r["report"]["energy"].as_f64().unwrap(), 0.0);
}

#[test]
fn identical_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "flow", "--level", "3", "--init", "random", "--seed", "7", "--method", "minimize", "--tol", "1e-10",
    ];
    ok(&fkm(&args, a.path()));
    ok(&fkm(&args, b.path()));
    for f in ["equilibrium.json", "phases.csv", "initial.csv"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    let c = tempfile::tempdir().unwrap();
    let mut other = args.to_vec();
    other[6] = "8";
    ok(&fkm(&other, c.path()));
    assert_ne!(
        fs::read(a.path().join("initial.csv")).unwrap(),
        fs::read(c.path().join("initial.csv")).unwrap()
    );
}

#[test]
fn verify_ring_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    ok(&fkm(
        &["verify", "--fractal", "ring", "--degree", "1", "--levels", "3..8"],
        dir.path(),
    ));
    let r = json(&dir.path().join("verify.json"));
    for row in r["rows"].as_array().unwrap() {
        let gap = row["km_energy"].as_f64().unwrap() - row["lift_energy"].as_f64().unwrap();
        assert!((gap - row["closed_form_gap"].as_f64().unwrap()).abs() < 1e-12);
    }
}

#[test]
fn verify_degree_zero_has_no_gap() {
    let dir = tempfile::tempdir().unwrap();
    let o = fkm(&["verify", "--degree", "0", "--levels", "2..4"], dir.path());
    ok(&o);
    let r = json(&dir.path().join("verify.json"));
    assert!(r["rows"]
        .as_array()
        .unwrap()
        .iter()
        .all(|row| row["gap"].as_f64().unwrap() == 0.0));
    assert!(r["fitted_exponent"].is_null());
}

#[test]
fn config_file_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"mode":"sweep","fractal":"ring","levels":"4..5","degrees":"1;-1;2"}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    ok(&fkm(&["sweep", "--config", cfg.to_str().unwrap()], &out));
    let rows = json(&out.join("sweep.json"));
    assert_eq!(rows.as_array().unwrap().len(), 6);
    assert!(rows.as_array().unwrap().iter().all(|r| r["stability"] == "stable"));

    let wrong = fkm(&["twist", "--config", cfg.to_str().unwrap()], &out);
    assert!(String::from_utf8(wrong.stderr).unwrap().starts_with("error: usage: "));
}

#[test]
fn covering_exports() {
    let dir = tempfile::tempdir().unwrap();
    ok(&fkm(&["covering", "--degree", "1,1,1,1"], dir.path()));
    let c = json(&dir.path().join("covering.json"));
    assert_eq!(c["cuts"].as_array().unwrap().len(), 4);
    let s = json(&dir.path().join("summary.json"));
    assert!(s["boundary_normal_derivatives"]
        .as_array()
        .unwrap()
        .iter()
        .all(|v| v.as_f64().unwrap().abs() < 1e-9));
}
