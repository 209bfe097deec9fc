use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn logcone(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logcone")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok_json(dir: &Path, args: &[&str]) -> Value {
    let out = logcone(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn run_ok(dir: &Path, args: &[&str]) {
    let out = logcone(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unit_interval_variance_and_triangle_slope() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    run_ok(d, &["gen", "uniform_box", "--dim", "1", "--h", "0.01", "-o", "u.lcg"]);
    let s = ok_json(d, &["stats", "-i", "u.lcg"]);
    let var = s["moments"]["cov"]["entries"][0].as_f64().unwrap();
    assert!((var - 1.0 / 12.0).abs() < 1e-4, "{var}");

    run_ok(d, &["convolve", "-i", "u.lcg", "-i", "u.lcg", "-o", "t.lcg"]);
    let l = ok_json(d, &["lipschitz", "-i", "t.lcg", "--axis", "0"]);
    assert!((l["constant"].as_f64().unwrap() - 1.0).abs() < 0.02);
}

#[test]
fn split_of_two_halves() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    std::fs::write(d.join("half_half.json"), r#"{"eps": 0.1, "matrices": [[[0.5]], [[0.5]]]}"#).unwrap();
    let r = ok_json(d, &["split-cov", "-i", "half_half.json"]);
    assert_eq!(r["kind"], "MiddleEigen");
    assert_eq!(r["lambda"].as_f64(), Some(0.5));
}

#[test]
fn isotropic_stats_carry_band_flags() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    run_ok(d, &["gen", "laplace", "--dim", "2", "--h", "0.05", "--unit-variance", "-o", "l.lcg"]);
    let s = ok_json(d, &["stats", "-i", "l.lcg"]);
    assert_eq!(s["sup_in_band"], true);
    assert_eq!(s["slices_in_band"], true);
    assert!(s["isotropic_constant"].as_f64().unwrap() > 0.0);
}

#[test]
fn pipeline_of_grid_operations() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    run_ok(d, &["gen", "exponential", "--dim", "1", "--h", "0.01", "-o", "e.lcg"]);
    run_ok(d, &["symmetrize", "-i", "e.lcg", "--axis", "0", "--recenter", "-o", "s.lcg"]);
    let c = ok_json(d, &["check", "-i", "s.lcg"]);
    assert_eq!(c["passed"], true);

    run_ok(d, &["gen", "gaussian", "--dim", "2", "--h", "0.05", "--param", "1", "--param", "2", "-o", "g.lcg"]);
    run_ok(d, &["isotropize", "-i", "g.lcg", "-o", "gi.lcg", "--map", "m.json"]);
    let m: Value = serde_json::from_str(&std::fs::read_to_string(d.join("m.json")).unwrap()).unwrap();
    assert!((m["entries"][3].as_f64().unwrap() - 0.5).abs() < 1e-3);

    std::fs::write(d.join("dirs.json"), "[[0.0, 1.0]]").unwrap();
    run_ok(d, &["project", "-i", "g.lcg", "--dirs", "dirs.json", "-o", "p.lcg"]);
    let s = ok_json(d, &["stats", "-i", "p.lcg"]);
    assert!((s["moments"]["cov"]["entries"][0].as_f64().unwrap() - 4.0).abs() < 1e-3);

    run_ok(d, &["render", "-i", "g.lcg", "-o", "g.pgm"]);
    let pgm = std::fs::read(d.join("g.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n"));
    assert_eq!(*pgm.iter().max().unwrap(), 255);
}

#[test]
fn csv_outputs() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    run_ok(d, &["demo", "clt", "--n", "4", "-o", "clt.csv"]);
    let clt = std::fs::read_to_string(d.join("clt.csv")).unwrap();
    assert!(clt.starts_with("n,sup_distance"));
    assert_eq!(clt.lines().count(), 5);

    run_ok(d, &["sweep-lipschitz", "--family", "gaussian", "--family", "laplace", "--dim", "1", "-o", "s.csv"]);
    let sweep = std::fs::read_to_string(d.join("s.csv")).unwrap();
    assert!(sweep.starts_with("family,dim,axis,varX,lipschitz,product"));
    assert_eq!(sweep.lines().count(), 10);

    run_ok(d, &["demo", "parallelotope", "-o", "p.csv"]);
    let rows = std::fs::read_to_string(d.join("p.csv")).unwrap();
    assert!(rows.lines().count() > 10);
}

#[test]
fn seeded_suite_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let a = logcone(tmp.path(), &["suite", "--seed", "3", "--trials", "25"]);
    let b = logcone(tmp.path(), &["suite", "--seed", "3", "--trials", "25"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    assert_eq!(logcone(d, &["no-such-command"]).status.code(), Some(2));
    assert_eq!(logcone(d, &["gen", "gaussian"]).status.code(), Some(2));

    let missing = logcone(d, &["stats", "-i", "absent.lcg"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("Io"));

    run_ok(d, &["gen", "uniform_box", "--dim", "1", "--h", "0.1", "-o", "u.lcg"]);
    let render = logcone(d, &["render", "-i", "u.lcg", "-o", "u.pgm"]);
    assert_eq!(render.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&render.stderr).starts_with("DimensionMismatch"));

    std::fs::write(d.join("bad.json"), r#"{"eps": 0.9, "matrices": [[[0.5]], [[0.5]]]}"#).unwrap();
    let split = logcone(d, &["split-cov", "-i", "bad.json"]);
    assert_eq!(split.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&split.stderr).starts_with("EpsOutOfRange"));
}

#[test]
fn failed_check_exits_one() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let mut text = String::from("LCGRID v1\ndim 1\nshape 5\norigin 0\nspacing 1\n");
    for v in [1.0, 0.1, 1.0, 0.1, 1.0] {
        text.push_str(&format!("{v}\n"));
    }
    std::fs::write(d.join("bumpy.lcg"), text).unwrap();
    let out = logcone(d, &["check", "-i", "bumpy.lcg"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("NotLogConcave"));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], false);
}
