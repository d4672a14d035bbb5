use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use stokes_mg::cli::{cmd_census, cmd_run, cmd_verify, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_USAGE};
use stokes_mg::config::{RunConfig, OUTPUT_DIR_ENV};
use tempfile::TempDir;

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p
}

fn census_line(json: &str) -> (i32, String) {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", json);
    let mut out = Vec::new();
    let code = cmd_census(&cfg, &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn summary(dir: &Path) -> Vec<(String, String)> {
    fs::read_to_string(dir.join("summary.txt"))
        .unwrap()
        .lines()
        .map(|l| {
            let (k, v) = l.split_once('=').unwrap();
            (k.to_string(), v.to_string())
        })
        .collect()
}

#[test]
fn census_of_the_large_cavity() {
    let (code, line) = census_line(r#"{"scenario": {"name": "cavity2d", "resolution": [1024]}}"#);
    assert_eq!(code, EXIT_OK);
    // 12272 / 3143680 rounds to 0.39%.
    assert_eq!(line, "3143680 12272 0.39%\n");
}

#[test]
fn census_of_the_fine_cylinder_channel() {
    let (code, line) = census_line(r#"{"scenario": {"name": "cylinder2d", "resolution": [2200, 410]}}"#);
    assert_eq!(code, EXIT_OK);
    let f: Vec<&str> = line.split_whitespace().collect();
    let total: f64 = f[0].parse().unwrap();
    let band: f64 = f[1].parse().unwrap();
    assert!((total / 2_680_020.0 - 1.0).abs() < 0.01, "{line}");
    assert!((band / 18_493.0 - 1.0).abs() < 0.02, "{line}");
}

#[test]
fn census_of_an_empty_domain_file() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("empty.txt"), "2 3 2 0.5\nEEE\nEEE\n").unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"domain_file": "empty.txt"}"#);
    let mut out = Vec::new();
    assert_eq!(cmd_census(&cfg, &mut out), EXIT_OK);
    assert_eq!(String::from_utf8(out).unwrap(), "0 0 0.00%\n");
}

#[test]
fn run_writes_history_summary_and_fields() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "run.json",
        r#"{"scenario": {"name": "cavity2d", "resolution": [64]}, "method": "mg-sqmr", "emit": {"vtk": true}}"#,
    );
    let outdir = tmp.path().join("out");
    let mut out = Vec::new();
    assert_eq!(cmd_run(&cfg, Some(&outdir), &mut out), EXIT_OK);
    assert!(String::from_utf8(out).unwrap().starts_with("converged"));

    let csv = fs::read_to_string(outdir.join("history_mg-sqmr.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("iteration,rel_residual,seconds"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows[0][0], 0.0);
    assert!(rows.windows(2).all(|w| w[1][0] == w[0][0] + 1.0));
    assert!(rows.last().unwrap()[1] < 1e-8);

    let keys: Vec<String> = summary(&outdir).into_iter().map(|(k, _)| k).collect();
    for k in ["scenario", "method", "status", "iterations", "final_residual", "divergence_inf", "dofs", "levels"] {
        assert!(keys.iter().any(|x| x == k), "missing {k}");
    }
    let vtk = fs::read_to_string(outdir.join("fields.vtk")).unwrap();
    assert!(vtk.contains("DIMENSIONS 67 67 1") && vtk.contains("CELL_DATA 4356"));
}

#[test]
fn csv_is_byte_stable_without_timings() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "run.json",
        r#"{"scenario": {"name": "cavity2d", "resolution": [32]}, "emit": {"timings": false}}"#,
    );
    let mut bytes = Vec::new();
    for k in 0..2 {
        let d = tmp.path().join(format!("o{k}"));
        assert_eq!(cmd_run(&cfg, Some(&d), &mut Vec::new()), EXIT_OK);
        bytes.push(fs::read(d.join("history_mg-sqmr.csv")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn stalled_multigrid_exits_with_two() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "run.json",
        r#"{"scenario": {"name": "hollow_square2d", "resolution": [256, 256]}, "method": "mg", "max_iterations": 50}"#,
    );
    let d = tmp.path().join("o");
    assert_eq!(cmd_run(&cfg, Some(&d), &mut Vec::new()), EXIT_NOT_CONVERGED);
    let s = summary(&d);
    assert!(s.iter().any(|(k, v)| k == "status" && v != "converged"));
}

#[test]
fn malformed_configs_exit_with_one() {
    let tmp = TempDir::new().unwrap();
    for (i, json) in ["{", r#"{"scenario": {"name": "cavity2d", "resolution": [8]}, "tol": 0}"#, r#"{"method": "mg"}"#]
        .iter()
        .enumerate()
    {
        let cfg = write_config(tmp.path(), &format!("bad{i}.json"), json);
        assert_eq!(cmd_run(&cfg, Some(tmp.path()), &mut Vec::new()), EXIT_USAGE, "{json}");
        assert_eq!(cmd_census(&cfg, &mut Vec::new()), EXIT_USAGE);
    }
    assert_eq!(cmd_census(&tmp.path().join("missing.json"), &mut Vec::new()), EXIT_USAGE);
}

#[test]
fn verify_passes_and_detects_a_broken_smoother() {
    let mut out = Vec::new();
    assert_eq!(cmd_verify(8, false, &mut out), EXIT_OK);
    let text = String::from_utf8(out).unwrap();
    assert!(text.lines().last().unwrap().ends_with(" 0 failed"));
    let mut out = Vec::new();
    assert_eq!(cmd_verify(8, true, &mut out), EXIT_USAGE);
    assert!(String::from_utf8(out).unwrap().contains("FAIL"));
}

#[test]
fn output_directory_precedence() {
    let cfg = RunConfig::from_json(r#"{"scenario": {"name": "cavity2d", "resolution": [8]}}"#).unwrap();
    let mut with_dir = cfg.clone();
    with_dir.output_dir = Some("from_config".into());
    std::env::set_var(OUTPUT_DIR_ENV, "from_env");
    assert_eq!(cfg.resolve_output_dir(None), PathBuf::from("from_env"));
    assert_eq!(with_dir.resolve_output_dir(None), PathBuf::from("from_config"));
    assert_eq!(with_dir.resolve_output_dir(Some(Path::new("cli"))), PathBuf::from("cli"));
    std::env::remove_var(OUTPUT_DIR_ENV);
    assert_eq!(cfg.resolve_output_dir(None), PathBuf::from("."));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_solver");
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"scenario": {"name": "cavity2d", "resolution": [16]}}"#);
    let census = Command::new(bin).arg("census").arg(&cfg).output().unwrap();
    assert_eq!(census.status.code(), Some(EXIT_OK));
    assert_eq!(String::from_utf8(census.stdout).unwrap(), "736 176 23.91%\n");

    let run = Command::new(bin)
        .args(["--threads", "1", "run"])
        .arg(&cfg)
        .env(OUTPUT_DIR_ENV, tmp.path().join("env_out"))
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(EXIT_OK));
    assert!(tmp.path().join("env_out/summary.txt").exists());

    let bad = Command::new(bin).arg("frobnicate").output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
}
