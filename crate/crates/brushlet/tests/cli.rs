//! End-to-end runs of the `brushlet` binary against the shipped configs.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_brushlet")
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn temp_out(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("brushlet_cli_{tag}"));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn partition_reproduces_tiling_geometry() {
    let out = temp_out("partition");
    let status = Command::new(bin())
        .args(["partition", "--config"])
        .arg(repo_config("fig1_partition.json"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let svg = std::fs::read_to_string(out.join("tiling.svg")).unwrap();
    // Corner coordinates of the layer-3 corridor appear in raw frequency
    // units, matching the published values to 1e-6.
    let numbers: Vec<f64> = svg
        .split(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-'))
        .filter_map(|tok| tok.parse::<f64>().ok())
        .collect();
    for target in [8.110321686, 14.03066786, 6.127030896, 9.849155307] {
        let hit = numbers.iter().any(|&v| (v.abs() - target).abs() < 1e-6);
        assert!(hit, "SVG misses corner coordinate {target}");
    }
    let layer3: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("layer_003.json")).unwrap())
            .unwrap();
    assert_eq!(layer3["count"], 88);
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn bells_profile_dump() {
    let out = temp_out("bells");
    let status = Command::new(bin())
        .args(["bells", "--config"])
        .arg(repo_config("fig1_partition.json"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("bells.csv")).unwrap();
    assert!(csv.starts_with("dim,xi,bell,brushlet"));
    assert!(csv.lines().count() > 1000);
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn missing_config_is_a_usage_error() {
    let output = Command::new(bin()).arg("verify").output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("--config"));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let out = temp_out("badcfg");
    std::fs::create_dir_all(&out).unwrap();
    let bad = out.join("bad.json");
    std::fs::write(
        &bad,
        r#"{"version":1,"anisotropy":[1.0,1.0],"alpha":0.0,"typo_key":true}"#,
    )
    .unwrap();
    let output = Command::new(bin())
        .args(["partition", "--config"])
        .arg(&bad)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn infeasible_jackson_block_is_rejected_up_front() {
    let out = temp_out("infeasible");
    std::fs::create_dir_all(&out).unwrap();
    let cfg = out.join("cfg.json");
    // tau breaks the balance 1/tau - 1/p = (gamma-beta)/nu - r/t.
    std::fs::write(
        &cfg,
        r#"{
          "version": 1,
          "anisotropy": [1.0, 1.0],
          "alpha": 0.5,
          "seed": 1,
          "jackson": [{
            "anisotropy": [2.0], "alpha": 0.5, "j_max": 8,
            "gamma": 1.5, "tau": 0.9, "beta": 0.5,
            "p": 2.0, "t": 2.0, "m_exponents": [2, 3], "trials": 1
          }]
        }"#,
    )
    .unwrap();
    let output = Command::new(bin())
        .args(["approx", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("balance"));
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn same_seed_gives_identical_outputs() {
    let out1 = temp_out("seed1");
    let out2 = temp_out("seed2");
    for out in [&out1, &out2] {
        let status = Command::new(bin())
            .args(["verify", "--config"])
            .arg(repo_config("verify_fig1.json"))
            .arg("--out")
            .arg(out)
            .args(["--seed", "123", "--jobs", "2"])
            .status()
            .unwrap();
        assert!(status.success());
    }
    for name in [
        "covering_report.json",
        "projection_residuals.csv",
        "gram.csv",
    ] {
        let a = std::fs::read(out1.join(name)).unwrap();
        let b = std::fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs for identical seeds");
    }
    let _ = std::fs::remove_dir_all(&out1);
    let _ = std::fs::remove_dir_all(&out2);
}

#[test]
fn approx_suite_passes_end_to_end() {
    let out = temp_out("approx");
    let output = Command::new(bin())
        .args(["approx", "--config"])
        .arg(repo_config("approx_suite.json"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(
        output.status.success(),
        "approx suite failed:\n{stdout}\n{}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(stdout.contains("[PASS] jackson_0"));
    assert!(stdout.contains("[PASS] jackson_1"));
    assert!(stdout.contains("[PASS] bernstein_0"));
    assert!(stdout.contains("[PASS] counting_0"));
    assert!(out.join("rates.csv").exists());
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn transform_run_writes_reports() {
    let out = temp_out("transform");
    let status = Command::new(bin())
        .args(["transform", "--config"])
        .arg(repo_config("transform_gaussian.json"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for name in [
        "coefficients.json",
        "parseval.csv",
        "synthesis.grid",
        "norms.csv",
    ] {
        assert!(out.join(name).exists(), "{name} missing");
    }
    // The binary grid round-trips through the documented format.
    let bytes = std::fs::read(out.join("synthesis.grid")).unwrap();
    let grid = brushlet::transform::grid_from_binary(&bytes).unwrap();
    assert_eq!(grid.sizes(), vec![121, 121]);
    let _ = std::fs::remove_dir_all(&out);
}
