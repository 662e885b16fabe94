use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qfilter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfilter"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_arg(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn rows(p: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    qfilter::output::read_csv(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn validate_passes_and_lists() {
    let out = qfilter(&["validate"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let listed = qfilter(&["validate", "--list"]);
    assert!(listed.status.success());
    let names: Vec<String> = String::from_utf8(listed.stdout)
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect();
    assert_eq!(names, qfilter::validate::check_names());
}

#[test]
fn simulate_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f2.csv");
    let status = qfilter(&["simulate", "--scenario", "fig2_vacuum_hd", "--out", path_arg(&out)]);
    assert!(status.status.success());
    let (header, data) = rows(&out);
    assert_eq!(header, ["t", "x", "y", "z", "dW", "Y", "P"]);
    assert_eq!(data.len(), 1001);
    assert_eq!(data[0][1..4], [1.0, 0.0, 0.0]);
    let manifest = read_json(&dir.path().join("f2.manifest.json"));
    assert_eq!(manifest["seed"], 20_240_901);
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["config"]["detection"], "homodyne");
    assert!(manifest["git_describe"].as_str().is_some_and(|s| !s.is_empty()));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        assert!(qfilter(&["simulate", "--scenario", "fig4_single_photon_pd", "--out", path_arg(p)]).status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn manifest_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    assert!(qfilter(&["simulate", "--scenario", "fig6_cat_pd", "--seed", "99", "--out", path_arg(&first)])
        .status
        .success());
    let manifest = read_json(&dir.path().join("first.manifest.json"));
    let config = dir.path().join("replay.json");
    fs::write(&config, serde_json::to_string(&manifest["config"]).unwrap()).unwrap();
    let second = dir.path().join("second.csv");
    assert!(qfilter(&["simulate", "--config", path_arg(&config), "--out", path_arg(&second)]).status.success());
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
}

#[test]
fn seed_override_changes_the_record() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(qfilter(&["simulate", "--scenario", "fig2_vacuum_hd", "--out", path_arg(&a)]).status.success());
    assert!(qfilter(&["simulate", "--scenario", "fig2_vacuum_hd", "--seed", "5", "--out", path_arg(&b)])
        .status
        .success());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(read_json(&dir.path().join("b.manifest.json"))["seed"], 5);
}

#[test]
fn vacuum_counting_resets_to_ground_at_the_jump() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f3.csv");
    assert!(qfilter(&["simulate", "--scenario", "fig3_vacuum_pd", "--out", path_arg(&out)]).status.success());
    let (_, data) = rows(&out);
    let first = data.iter().position(|r| r[5] > 0.0).expect("one photon is detected");
    assert!(data[..first].iter().all(|r| r[3] == 1.0));
    assert!(data[first..].iter().all(|r| r[3] == -1.0 && r[1] == 0.0 && r[2] == 0.0));
}

#[test]
fn ensemble_writes_statistics_metrics_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ens.csv");
    let status = qfilter(&[
        "ensemble",
        "--scenario",
        "fig2_vacuum_hd",
        "--out",
        path_arg(&out),
        "--dump-trajectories",
    ]);
    assert!(status.status.success());
    let (header, _) = rows(&out);
    for obs in ["x", "y", "z", "P"] {
        for suffix in ["mean", "se", "me"] {
            assert!(header.contains(&format!("{obs}_{suffix}")), "missing {obs}_{suffix}");
        }
    }
    let metrics = read_json(&dir.path().join("ens.metrics.json"));
    for obs in ["x", "y", "z"] {
        assert!(metrics["metrics"][format!("sup_norm_{obs}")].is_f64());
        assert!(metrics["metrics"][format!("rmse_{obs}")].is_f64());
    }
    let dumps = fs::read_dir(dir.path().join("ens_trajectories")).unwrap().count();
    assert_eq!(dumps, 50);
}

#[test]
fn large_vacuum_ensemble_tracks_the_master_equation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("big.csv");
    let status = qfilter(&[
        "ensemble",
        "--scenario",
        "fig2_vacuum_hd",
        "--trajectories",
        "2000",
        "--out",
        path_arg(&out),
    ]);
    assert!(status.status.success());
    let metrics = read_json(&dir.path().join("big.metrics.json"));
    assert!(metrics["metrics"]["sup_norm_z"].as_f64().unwrap() < 0.05);
}

#[test]
fn purity_command_writes_rates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let status = qfilter(&[
        "purity",
        "--scenario",
        "fig4_single_photon_hd",
        "--trajectories",
        "4",
        "--out",
        path_arg(&out),
    ]);
    assert!(status.status.success());
    let (header, data) = rows(&out);
    assert_eq!(header[1], "P_me");
    for r in &data {
        assert!((r[2] - r[3]).abs() < 1e-10, "trace and closed-form rates differ at t={}", r[0]);
    }
}

#[test]
fn invalid_configs_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    let good = qfilter::scenarios::builtin_config("fig2_vacuum_hd").unwrap().to_json();
    fs::write(&cfg, good.replacen('{', "{\"extra\": 1,", 1)).unwrap();
    let out = dir.path().join("o.csv");
    let cases: [Vec<&str>; 4] = [
        vec!["simulate", "--config", path_arg(&cfg), "--out", path_arg(&out)],
        vec!["simulate", "--config", "/nonexistent/cfg.json"],
        vec!["simulate", "--scenario", "fig9"],
        vec!["ensemble"],
    ];
    for args in cases {
        assert_eq!(qfilter(&args).status.code(), Some(2), "{args:?}");
    }
    assert!(!out.exists());
}

#[test]
fn divergence_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = qfilter::scenarios::builtin_config("fig2_vacuum_hd").unwrap();
    config.system.gamma = 1e6;
    let cfg = dir.path().join("stiff.json");
    fs::write(&cfg, config.to_json()).unwrap();
    let out = qfilter(&["simulate", "--config", path_arg(&cfg), "--out", path_arg(&dir.path().join("s.csv"))]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("coarse") && stderr.contains("diverged at step"), "{stderr}");
}

#[test]
fn scenario_list() {
    let out = qfilter(&["simulate", "--scenario", "list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().collect::<Vec<_>>(), qfilter::scenarios::NAMES);
}
