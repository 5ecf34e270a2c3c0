use std::fs;
use std::process::{Command, Output};

use npc_reliability::config::{RunConfig, DEFAULT_CONFIG_TOML};

fn npc_rel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_npc-rel")).args(args).output().expect("spawn npc-rel")
}

fn write_config(dir: &tempfile::TempDir, edit: impl FnOnce(&mut RunConfig)) -> String {
    let mut cfg = RunConfig::default();
    edit(&mut cfg);
    let path = dir.path().join("run.toml");
    fs::write(&path, cfg.to_toml().unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn dump_default_config_is_verbatim_and_loadable() {
    let out = npc_rel(&["dump-default-config"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, DEFAULT_CONFIG_TOML);
    let cfg = RunConfig::from_toml(&text).unwrap();
    assert_eq!(cfg, RunConfig::default());
}

#[test]
fn compare_writes_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = npc_rel(&["compare", "--mode", "paper-factors", "--format", "csv", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let comparison = fs::read_to_string(out_dir.join("comparison.csv")).unwrap();
    let lines: Vec<&str> = comparison.lines().collect();
    assert_eq!(lines[0], "strategy,lambda_1e-6_per_h,mttf_h,mttf_gain_vs_min_pct");
    assert_eq!(lines.len(), 4);
    let parts = fs::read_to_string(out_dir.join("parts.csv")).unwrap();
    // header + 3 strategies × (10 devices + 2 capacitors)
    assert_eq!(parts.lines().count(), 1 + 36);
}

#[test]
fn plotdata_surface_has_full_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = npc_rel(&["evaluate", "--strategy", "svpwm", "--format", "plotdata", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let surface = fs::read_to_string(dir.path().join("loss_surface_svpwm.csv")).unwrap();
    let mut lines = surface.lines();
    assert_eq!(lines.next().unwrap(), "modulation_index,phase_lag_deg,s1_total_W,s2_total_W,leg_total_W");
    assert_eq!(lines.count(), 399);

    let shares = fs::read_to_string(dir.path().join("shares.csv")).unwrap();
    let total: f64 = shares.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 100.0).abs() < 1e-9);
}

#[test]
fn losses_verb_prints_every_role() {
    let out = npc_rel(&["losses", "--strategy", "spwm", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert!(text.lines().any(|l| l.starts_with("SPWM,S2,")));
}

#[test]
fn simulate_dclink_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.txt");
    let out = npc_rel(&["simulate-dclink", "--strategy", "svpwm", "--cycles", "10", "--trace", trace.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(summary["c2"]["v_dc_V"].as_f64().unwrap() > summary["c1"]["v_dc_V"].as_f64().unwrap());
    let text = fs::read_to_string(trace).unwrap();
    assert_eq!(text.lines().next().unwrap(), "time_s V_C1_V V_C2_V");
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(&dir, |c| c.operating_point.modulation_index = 1.5);
    let out = npc_rel(&["compare", "--config", &path]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("modulation index"));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[operating_point]\nunknown = 1\n").unwrap();
    assert_eq!(npc_rel(&["compare", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(npc_rel(&["compare", "--mode", "guess"]).status.code(), Some(2));
}

#[test]
fn numeric_errors_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    // a step longer than a twentieth of the carrier period is rejected by the simulator
    let path = write_config(&dir, |c| c.simulation.step = 1e-4);
    let out = npc_rel(&["simulate-dclink", "--strategy", "spwm", "--config", &path]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn io_errors_exit_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let target = blocker.join("out");
    let out = npc_rel(&["compare", "--format", "json", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let missing = dir.path().join("missing.toml");
    assert_eq!(npc_rel(&["compare", "--config", missing.to_str().unwrap()]).status.code(), Some(1));
}
