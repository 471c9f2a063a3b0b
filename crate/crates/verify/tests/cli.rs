use std::fs;
use std::process::Command;

fn verify(args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_verify"))
        .args(args)
        .output()
        .unwrap();
    out.status.code().unwrap()
}

fn write_config(dir: &std::path::Path, body: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn grid_only_run_passes_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "dimension = 2\nsuites = [\"grid\"]\n[grid]\nk_min = -2\nk_max = 2\nwindow = 2\n",
    );
    assert_eq!(verify(&[&cfg, "--out", out.to_str().unwrap()]), 0);
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("grid.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["provenance"]["seed"], 0);
    let csv = fs::read_to_string(out.join("grid.properties.csv")).unwrap();
    assert!(csv.starts_with("d,shift_id,property,checked,violations"));
    assert!(out.join("timings.json").exists());
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write_config(dir.path(), "dimension = 2\nsuites = []\n");
    assert_eq!(verify(&[&empty]), 2);
    assert_eq!(
        verify(&[dir.path().join("missing.toml").to_str().unwrap()]),
        2
    );
    let bad_r = write_config(
        dir.path(),
        "dimension = 2\nsuites = [\"sparse\"]\n[operator]\nr = 1.5\n",
    );
    assert_eq!(verify(&[&bad_r]), 2);
}

#[test]
fn suite_flag_and_seed_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "dimension = 2\nsuites = [\"sparse\"]\n[grid]\nk_min = -1\nk_max = 1\nwindow = 1\n",
    );
    assert_eq!(
        verify(&[
            &cfg,
            "--suite",
            "grid",
            "--seed",
            "11",
            "--out",
            out.to_str().unwrap()
        ]),
        0
    );
    assert!(!out.join("sparse.json").exists());
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("grid.json")).unwrap()).unwrap();
    assert_eq!(report["provenance"]["seed"], 11);
}

#[test]
fn failing_assertion_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    // A negative tolerance cannot be met.
    let cfg = write_config(
        dir.path(),
        "dimension = 2\nsuites = [\"spectral\"]\n[spectral]\nsamples = 4\nl2_resolution = 16\nks = [0, 0]\ncontinuity_levels = 4\n[tolerances]\ncovariance_rel = -1.0\n",
    );
    assert_eq!(verify(&[&cfg, "--out", out.to_str().unwrap()]), 1);
    assert!(out.join("spectral.json").exists());
}
