//! End-to-end checks of the `spinsync` binary: exit codes, config round
//! trips and the file-based fit path.

use std::path::Path;
use std::process::{Command, Output};

fn spinsync(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinsync"))
        .args(["--out", dir.join("out").to_str().unwrap()])
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run spinsync")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Value of `key=value` in a report printed to stdout.
fn report_value(out: &Output, key: &str) -> f64 {
    let report = String::from_utf8_lossy(&out.stdout);
    report
        .lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix('='))
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or_else(|| panic!("no {key} in report:\n{report}"))
}

#[test]
fn line_center_detuning_is_a_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = spinsync(dir.path(), &["xsection", "--nu-ghz", "0"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("singular detuning"));
}

#[test]
fn beam_without_calibration_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[beam]\ndetuning_ghz = 12.0\ncalibration = \"none\"\n").unwrap();
    let out = spinsync(
        dir.path(),
        &["--config", cfg.to_str().unwrap(), "resonance", "--b-mg", "0.5"],
    );
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.toml");
    std::fs::write(&cfg, "[relaxation]\nr_spin_exchange = 170.0\n").unwrap();
    let out = spinsync(dir.path(), &["--config", cfg.to_str().unwrap(), "defaults"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_duration_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = spinsync(dir.path(), &["simulate", "--duration-s", "0"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn empty_sweep_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    std::fs::write(&cfg, "[sweep]\nb_count = 0\n").unwrap();
    let out = spinsync(dir.path(), &["--config", cfg.to_str().unwrap(), "sweep"]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn defaults_round_trip_through_config() {
    let dir = tempfile::tempdir().unwrap();
    let first = spinsync(dir.path(), &["defaults"]);
    assert!(first.status.success());
    let cfg = dir.path().join("defaults.toml");
    std::fs::write(&cfg, &first.stdout).unwrap();
    let second = spinsync(dir.path(), &["--config", cfg.to_str().unwrap(), "defaults"]);
    assert!(second.status.success(), "{}", stderr(&second));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn resonance_reports_both_directions() {
    let dir = tempfile::tempdir().unwrap();
    let out = spinsync(dir.path(), &["resonance", "--b-mg", "0.86"]);
    assert!(out.status.success());
    assert!((report_value(&out, "p_mw") - 19.4).abs() < 1e-9);
    let out = spinsync(dir.path(), &["resonance", "--p-mw", "9.7"]);
    assert!(out.status.success());
    assert!((report_value(&out, "b_mg") - 0.43).abs() < 1e-9);
}

#[test]
fn fit_recovers_simulated_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = spinsync(dir.path(), &["simulate", "--b-mg", "0.43", "--p-mw", "9.7"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let trace = dir.path().join("out").join("trace.csv");
    let header = std::fs::read_to_string(&trace).unwrap();
    assert!(header.starts_with("t_s,sx"));

    let out = spinsync(dir.path(), &["fit", trace.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let gamma = report_value(&out, "gamma_s");
    assert!((gamma - 15.602).abs() < 0.01, "gamma_s = {gamma}");
}

#[test]
fn malformed_trace_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("bad.csv");
    std::fs::write(&trace, "t_s,sx\n0.0,abc\n").unwrap();
    let out = spinsync(dir.path(), &["fit", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
