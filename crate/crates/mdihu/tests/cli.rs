use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mdihu(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdihu"))
        .args(args)
        .current_dir(dir)
        .env_remove("MDIHU_OUT")
        .env_remove("MDIHU_THREADS")
        .output()
        .expect("binary runs")
}

fn config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path
}

fn text(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

const SMALL_RUN: &str = r#"{
  "case": "three_well",
  "resolution": 9,
  "angles": ["pi/8"],
  "output": { "snapshots": [0.05] }
}"#;

#[test]
fn run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "run.json", SMALL_RUN);
    let out = mdihu(&["run", "--config", cfg.to_str().unwrap(), "--out", "o"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("o/three_well_small_multid_ihu_thetapi_8");
    for name in [
        "saturation.csv",
        "saturation.json",
        "saturation.vtk",
        "saturation_snapshot0.csv",
        "saturation_snapshot0.json",
        "newton_log.csv",
        "water_cut.csv",
        "diagnostics.json",
    ] {
        assert!(run.join(name).is_file(), "missing {name}");
    }
    assert!(!run.join("FAILED").exists());
    let map = text(&run.join("saturation.csv"));
    assert!(map.starts_with("S_w_i0[-],"));
    assert_eq!(map.lines().count(), 1 + 9);
    assert!(text(&run.join("saturation.vtk")).starts_with("# vtk DataFile Version"));
    let report: serde_json::Value = serde_json::from_str(&text(&run.join("diagnostics.json"))).unwrap();
    assert_eq!(report["status"], "ok");
    assert!(report["total_iterations"].as_u64().unwrap() > 0);
    let meta: serde_json::Value = serde_json::from_str(&text(&run.join("saturation.json"))).unwrap();
    assert_eq!(meta["nx"], 9);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "run.json", SMALL_RUN);
    for out in ["a", "b"] {
        let o = mdihu(&["run", "--config", cfg.to_str().unwrap(), "--out", out], dir.path());
        assert!(o.status.success());
    }
    for name in ["saturation.csv", "newton_log.csv", "water_cut.csv", "diagnostics.json"] {
        let a = fs::read(dir.path().join("a/three_well_small_multid_ihu_thetapi_8").join(name)).unwrap();
        let b = fs::read(dir.path().join("b/three_well_small_multid_ihu_thetapi_8").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs");
    }
}

#[test]
fn run_needs_a_single_descriptor() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.json", r#"{"resolution": 9, "angles": [0, "pi/4"]}"#);
    let out = mdihu(&["run", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sweep"));
}

#[test]
fn bad_configuration_names_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.json", "{\n  \"resolution\": 9,\n  \"angels\": [0]\n}");
    let out = mdihu(&["run", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("angels") && err.contains("line 3"), "{err}");

    let cfg = config(dir.path(), "d.json", r#"{"angles": ["2*pi"]}"#);
    let out = mdihu(&["run", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("angles[0]"));
}

#[test]
fn empty_configuration_uses_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "empty.json", "");
    let out = mdihu(&["dump-case", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let case = dir.path().join("mdihu-out/three_well_small_theta0");
    let dump: serde_json::Value = serde_json::from_str(&text(&case.join("case.json"))).unwrap();
    assert_eq!(dump["nx"], 51);
    assert_eq!(dump["producers"].as_array().unwrap().len(), 2);
    for name in ["permeability.csv", "porosity.csv", "depth.csv", "initial_saturation.csv", "initial_pressure.csv", "disc.csv", "case.vtk"] {
        assert!(case.join(name).is_file(), "missing {name}");
    }
}

#[test]
fn solver_abort_leaves_a_marker_and_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "c.json",
        r#"{"resolution": 9, "newton": {"max_iters": 1, "min_dt_fraction": 0.9}}"#,
    );
    let out = mdihu(&["run", "--config", cfg.to_str().unwrap(), "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let run = dir.path().join("o/three_well_small_multid_ihu_theta0");
    assert!(!text(&run.join("FAILED")).trim().is_empty());
    assert!(run.join("saturation.csv").is_file());
    let report: serde_json::Value = serde_json::from_str(&text(&run.join("diagnostics.json"))).unwrap();
    assert_ne!(report["status"], "ok");
}

#[test]
fn sweep_writes_a_summary_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "s.json",
        r#"{"case": "segregation", "resolution": 9, "angles": [0, "pi/4"], "cfl": ["large"],
            "schemes": ["ppu_1d", "multid_ihu"], "output": {"vtk": false}}"#,
    );
    let out = mdihu(&["sweep", "--config", cfg.to_str().unwrap(), "--out", "o", "--threads", "2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = text(&dir.path().join("o/summary.csv"));
    assert_eq!(summary.lines().count(), 1 + 4);
    let rows: serde_json::Value = serde_json::from_str(&text(&dir.path().join("o/summary.json"))).unwrap();
    let rotated = rows.as_array().unwrap().iter().filter(|r| r["theta"].as_f64() != Some(0.0));
    for r in rotated {
        assert!(r["orientation_metric"].as_f64().is_some());
    }
    assert!(dir.path().join("o/iterations.txt").is_file());
    assert!(!dir.path().join("o/segregation_large_ppu_1d_theta0/saturation.vtk").exists());
}

#[test]
fn verify_passes_with_few_samples() {
    let dir = tempfile::tempdir().unwrap();
    let out = mdihu(&["verify", "--samples", "200", "--seed", "3", "--out", "v"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = text(&dir.path().join("v/verify.csv"));
    assert!(csv.starts_with("name,passed,"));
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(1) == Some("true")));
}
