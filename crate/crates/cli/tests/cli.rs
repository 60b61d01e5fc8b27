use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use interchange_cli::batch::Manifest;

fn interchange(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_interchange")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

#[test]
fn empty_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "# nothing here\n");
    let out = interchange(&["--config", &cfg]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("mode"));
    assert_eq!(code(&interchange(&[])), 2);
}

#[test]
fn config_errors_name_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "mode = simulate\nn = 4\nc = 2\nt_max = 9\n");
    let out = interchange(&["--config", &cfg]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("`c`"), "{err}");
}

#[test]
fn simulate_writes_replicas_manifest_and_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        &format!("mode = simulate\nn = 10\nc = 2\nreplicas = 4\nseed = 1\noutput = {}\n", out_dir.display()),
    );
    let out = interchange(&["--config", &cfg, "--quiet"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = Manifest::read(&out_dir).unwrap();
    assert_eq!(manifest.files.len(), 4);
    assert_eq!(manifest.t_max, 2048);
    let resolved = fs::read_to_string(out_dir.join("config.resolved")).unwrap();
    assert!(resolved.contains("t_max = 2048"));

    // A second run into the same directory is refused without --force.
    assert_eq!(code(&interchange(&["--config", &cfg, "--quiet"])), 2);
    let forced = interchange(&["--config", &cfg, "--quiet", "--force"]);
    assert_eq!(code(&forced), 0);
    assert_eq!(Manifest::read(&out_dir).unwrap().files, manifest.files);
}

#[test]
fn flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = write_config(dir.path(), &format!("mode = simulate\nn = 10\nc = 2\noutput = {}\n", out_dir.display()));
    let out = interchange(&["--config", &cfg, "--n", "6", "--t-max", "50", "--quiet"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = Manifest::read(&out_dir).unwrap();
    assert_eq!((manifest.dimension, manifest.t_max), (6, 50));
}

#[test]
fn analyze_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let sim = interchange(&[
        "--mode", "simulate", "--n", "8", "--c", "1", "--replicas", "5", "--seed", "4", "--quiet",
        "--martingale", "true", "--output", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&sim), 0, "{}", String::from_utf8_lossy(&sim.stderr));
    let out = interchange(&["--mode", "analyze", "--input", out_dir.to_str().unwrap()]);
    assert!(matches!(code(&out), 0 | 1));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["format_version"], 1);
    assert!(summary["reports"].as_array().unwrap().iter().any(|r| r["check"] == "bookkeeping_identity"));
}

#[test]
fn oracle_mode_runs_only_exact_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = interchange(&["--mode", "oracle", "--output", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().count(), 1);
    assert!(stdout.starts_with("[PASS]  1 exact oracle equivalence"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("verify_report.json")).unwrap()).unwrap();
    assert_eq!(report["criteria"].as_array().unwrap().len(), 1);
}

#[test]
fn help_documents_every_key() {
    let out = interchange(&["--help"]);
    assert_eq!(code(&out), 0);
    let help = String::from_utf8_lossy(&out.stdout);
    for flag in ["--t-max", "--window-t", "--snapshot-every", "--force", "--resume", "--scale"] {
        assert!(help.contains(flag), "{flag} missing from help");
    }
}
