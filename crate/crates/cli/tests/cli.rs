//! End-to-end tests of the binary: determinism, the committed golden
//! run, exit codes, atomicity on failure, and config round-tripping.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_lplab")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin()).args(args).current_dir(dir).output().expect("spawn lplab")
}

fn write_config(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

const TOP_CONFIG: &str = r#"{
  "kind": "lie_poisson",
  "params": {"inertia": [1.0, 1.0, 2.0], "mu0": [1.0, 0.0, 1.0],
             "dt": 0.001, "n_steps": 50, "diagnostics_out": "top.csv"}
}"#;

#[test]
fn identical_config_and_seed_give_bit_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "top.json", TOP_CONFIG);
    for sub in ["a", "b"] {
        let out = run_in(
            tmp.path(),
            &["run", config.to_str().unwrap(), "--out-dir", sub, "--seed", "17"],
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(tmp.path().join("a/top.csv")).unwrap();
    let b = std::fs::read(tmp.path().join("b/top.csv")).unwrap();
    assert_eq!(a, b, "outputs differ between identical runs");
}

#[test]
fn golden_symmetric_top_regression() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &[
            "run",
            data.join("symmetric_top.json").to_str().unwrap(),
            "--out-dir",
            tmp.path().to_str().unwrap(),
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let produced = std::fs::read_to_string(tmp.path().join("symmetric_top.csv")).unwrap();
    let golden = std::fs::read_to_string(data.join("symmetric_top_golden.csv")).unwrap();
    let plines: Vec<&str> = produced.lines().collect();
    let glines: Vec<&str> = golden.lines().collect();
    assert_eq!(plines.len(), glines.len(), "row count differs from golden");
    assert_eq!(plines[0], glines[0], "header differs");
    // Value-wise comparison at 1e-12 (cross-platform contract); on the
    // platform that generated the golden file this is bit-exact.
    for (row, (p, g)) in plines.iter().zip(&glines).enumerate().skip(1) {
        for (pv, gv) in p.split(',').zip(g.split(',')) {
            let (pv, gv): (f64, f64) = (pv.parse().unwrap(), gv.parse().unwrap());
            assert!(
                (pv - gv).abs() <= 1e-12,
                "row {row}: {pv} differs from golden {gv}"
            );
        }
    }
}

#[test]
fn invalid_config_exits_1_without_partial_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        "bad.json",
        r#"{"kind": "lie_poisson",
            "params": {"inertia": [1.0], "mu0": [1.0], "n_steps": 1, "dtt": 0.1}}"#,
    );
    let outdir = tmp.path().join("out");
    let out = run_in(
        tmp.path(),
        &["run", config.to_str().unwrap(), "--out-dir", outdir.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("dtt"), "stderr should name the unknown key: {stderr}");
    assert!(
        !outdir.exists() || std::fs::read_dir(&outdir).unwrap().next().is_none(),
        "no partial outputs on failure"
    );
}

#[test]
fn engine_error_exits_2_without_partial_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    // CFL violation: uniform transport velocity 2 at dt = 0.1.
    let config = write_config(
        tmp.path(),
        "cfl.json",
        r#"{"kind": "fluid_compressible",
            "params": {"n": 64, "eos": {"form": "linear", "a": 0.0, "b": 0.0},
                       "p0": "2", "dt": 0.1, "n_steps": 10}}"#,
    );
    let outdir = tmp.path().join("out");
    let out = run_in(
        tmp.path(),
        &["run", config.to_str().unwrap(), "--out-dir", outdir.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("CFL"));
    assert!(!outdir.exists() || std::fs::read_dir(&outdir).unwrap().next().is_none());
}

#[test]
fn zero_step_run_writes_initial_snapshot_only() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        "zero.json",
        r#"{"kind": "proto", "params": {"n": 32, "s0": "x", "n_steps": 0}}"#,
    );
    let outdir = tmp.path().join("out");
    let out = run_in(
        tmp.path(),
        &["run", config.to_str().unwrap(), "--out-dir", outdir.to_str().unwrap()],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let files: Vec<String> = std::fs::read_dir(&outdir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(files, vec!["proto_snapshot.csv".to_string()]);
    let snapshot = std::fs::read_to_string(outdir.join("proto_snapshot.csv")).unwrap();
    assert!(snapshot.starts_with("x,S,rho,p,v\n"));
    assert_eq!(snapshot.lines().count(), 33);
}

#[test]
fn unknown_suite_name_lists_valid_names() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["suite", "everything"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    for name in ["conservation", "oracles", "all"] {
        assert!(stderr.contains(name), "stderr should list '{name}': {stderr}");
    }
}

#[test]
fn missing_config_file_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["run", "does_not_exist.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_suite_passes_on_a_correct_build() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["suite", "oracles"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("all 5 checks passed"), "{stdout}");
    assert!(!stdout.contains("FAIL"), "{stdout}");
}

#[test]
fn events_csv_has_expected_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        "proto.json",
        r#"{"kind": "proto", "params": {
            "n": 32, "s0": "x", "n_steps": 400,
            "shadow": {"kind": "analytic", "r_star": "x + 6*pi*y", "rate": "6*pi"}}}"#,
    );
    let outdir = tmp.path().join("out");
    let out = run_in(
        tmp.path(),
        &["run", config.to_str().unwrap(), "--out-dir", outdir.to_str().unwrap()],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let events = std::fs::read_to_string(outdir.join("proto_events.csv")).unwrap();
    let mut lines = events.lines();
    assert_eq!(lines.next().unwrap(), "marker_id,t_event");
    // The per-marker shadow phase ramps at 6π + 1/2 ≈ 19.35 rad/s, so
    // every one of the 32 markers crosses 2π once before t = 0.4.
    assert_eq!(lines.count(), 32);
}
