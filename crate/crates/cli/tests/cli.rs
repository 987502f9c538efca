use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bundled(name: &str) -> Value {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", name]
        .iter()
        .collect();
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, config: &Value) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path
}

fn mmac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmac"))
        .args(args)
        .output()
        .unwrap()
}

fn run(command: &str, config: &Value, extra: &[&str]) -> (Output, TempDir) {
    let dir = TempDir::new().unwrap();
    let path = write_config(dir.path(), config);
    let out = dir.path().join("out");
    let mut args = vec![
        command,
        "--config",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    (mmac(&args), dir)
}

fn read_csv(dir: &TempDir, name: &str) -> Vec<Vec<String>> {
    std::fs::read_to_string(dir.path().join("out").join(name))
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(rows: &[Vec<String>], decoder: &str) -> Vec<(f64, f64)> {
    rows[1..]
        .iter()
        .filter(|r| r[0] == decoder)
        .map(|r| (r[1].parse().unwrap(), r[2].parse().unwrap()))
        .collect()
}

#[test]
fn matched_region_columns_agree() {
    let mut c = bundled("fig1-matched.json");
    c["region"]["r2_step"] = json!(0.02);
    let (out, dir) = run("region", &c, &[]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = read_csv(&dir, "region.csv");
    assert_eq!(rows[0], ["decoder", "r2", "r1_max", "binding"]);
    let s = column(&rows, "successive");
    let m = column(&rows, "max-metric");
    assert_eq!(s.len(), m.len());
    for (a, b) in s.iter().zip(&m) {
        assert_eq!(a.0, b.0);
        assert!((a.1 - b.1).abs() <= 1e-3, "r2 {}: {} vs {}", a.0, a.1, b.1);
    }
    assert!(dir.path().join("out/region_report.json").exists());
    let meta: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out/metadata.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["command"], "region");
}

#[test]
fn bits_flag_only_rescales() {
    let mut c = bundled("fig1-standard.json");
    c["region"] = json!({ "decoders": ["successive"], "r2_step": 0.1 });
    let (_, nats) = run("region", &c, &[]);
    let (_, bits) = run("region", &c, &["--bits"]);
    let a = column(&read_csv(&nats, "region.csv"), "successive");
    let b = column(&read_csv(&bits, "region.csv"), "successive");
    for (x, y) in a.iter().zip(&b) {
        assert!((x.1 / std::f64::consts::LN_2 - y.1).abs() < 1e-9);
    }
}

#[test]
fn malformed_channel_row_is_rejected() {
    let mut c = bundled("fig1-standard.json");
    c["channel"] = json!({ "w": [
        [[0.9, 0.0, 0.0], [0.1, 0.8, 0.1]],
        [[0.1, 0.8, 0.1], [0.0, 0.1, 0.9]]
    ]});
    let (out, _dir) = run("region", &c, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("W(.|0,0)"));
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = TempDir::new().unwrap();
    let path = write_config(dir.path(), &bundled("fig1-standard.json"));
    let out = Command::new(env!("CARGO_BIN_EXE_mmac"))
        .args([
            "simulate",
            "--config",
            path.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .env("MMAC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exponent_surface_is_deterministic_and_consistent() {
    let mut c = bundled("fig1-standard.json");
    c["exponent"] = json!({ "r1": [0.1, 0.6], "r2": [0.1], "outer_denominator": 8 });
    let (first, a) = run("exponent", &c, &[]);
    assert!(
        first.status.success(),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    let (_, b) = run("exponent", &c, &[]);
    let bytes = |d: &TempDir| std::fs::read(d.path().join("out/exponent.csv")).unwrap();
    assert_eq!(bytes(&a), bytes(&b));
    let rows = read_csv(&a, "exponent.csv");
    assert_eq!(
        rows[0],
        [
            "r1",
            "r2",
            "exponent_user1",
            "exponent_user2",
            "grid_denominator"
        ]
    );
    let inside: f64 = rows[1][2].parse().unwrap();
    let outside: f64 = rows[2][2].parse().unwrap();
    assert!(inside > 0.0);
    assert_eq!(outside, 0.0);
    assert_eq!(rows[1][4], "8");
}

#[test]
fn cognitive_exponent_leaves_user2_blank() {
    let mut c = bundled("fig2-cognitive.json");
    c["exponent"] = json!({ "r1": [0.05], "r2": [0.0], "outer_denominator": 8 });
    let (out, dir) = run("exponent", &c, &[]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = read_csv(&dir, "exponent.csv");
    assert!(rows[1][2].parse::<f64>().unwrap() > 0.0);
    assert_eq!(rows[1][3], "");
}

#[test]
fn exact_simulation_is_flagged() {
    let mut c = bundled("fig1-standard.json");
    c["simulate"] = json!({ "n": [4], "m1": 2, "m2": 2, "mode": "exact" });
    let (out, dir) = run("simulate", &c, &[]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = read_csv(&dir, "simulate.csv");
    assert_eq!(rows[0].len(), 10);
    assert_eq!(rows.len(), 5);
    for r in &rows[1..] {
        assert_eq!(r[4], "exact");
        let p: f64 = r[7].parse().unwrap();
        assert!((0.0..=1.0).contains(&p));
    }
}

#[test]
fn monte_carlo_is_reproducible_under_a_seed() {
    let mut c = bundled("fig1-standard.json");
    c["simulate"] = json!({
        "n": [6], "r1": 0.1, "r2": 0.1, "mode": "monte_carlo",
        "codebook": "ensemble", "trials": 100000, "decoders": ["successive", "ml"]
    });
    let (_, a) = run("simulate", &c, &["--seed", "11"]);
    let (_, b) = run("simulate", &c, &["--seed", "11"]);
    let (_, other) = run("simulate", &c, &["--seed", "12"]);
    let bytes = |d: &TempDir| std::fs::read(d.path().join("out/simulate.csv")).unwrap();
    assert_eq!(bytes(&a), bytes(&b));
    assert_ne!(bytes(&a), bytes(&other));
    let rows = read_csv(&a, "simulate.csv");
    assert!(rows[1..]
        .iter()
        .all(|r| r[4] == "monte_carlo" && r[6] == "100000"));
}

#[test]
fn check_mode_reports_the_identities() {
    let mut c = bundled("fig1-standard.json");
    c["simulate"] = json!({ "n": [3, 4], "m1": 2, "m2": 2, "mode": "check", "codebooks": 4 });
    let (out, dir) = run("simulate", &c, &[]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = read_csv(&dir, "simulate_check.csv");
    assert_eq!(rows.len(), 9);
    for r in &rows[1..] {
        let (ml, s, genie): (f64, f64, f64) = (
            r[2].parse().unwrap(),
            r[3].parse().unwrap(),
            r[4].parse().unwrap(),
        );
        assert_eq!(genie, s);
        assert!(ml >= 0.0);
        assert_eq!((r[6].as_str(), r[7].as_str()), ("true", "true"));
    }
}

#[test]
fn validate_passes_on_bundled_configs() {
    for name in ["fig1-standard.json", "fig2-cognitive.json"] {
        let (out, dir) = run("validate", &bundled(name), &[]);
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert_eq!(out.status.code(), Some(0), "{name}\n{stdout}");
        assert!(stdout.contains("0 failed"));
        let rows = read_csv(&dir, "validate.csv");
        assert_eq!(rows[0], ["suite", "check", "detail", "status"]);
        assert!(rows.iter().any(|r| r[1] == "d=16 user2" && r[3] == "pass"));
    }
}

#[test]
fn corrupted_solver_tolerance_fails_validation() {
    let (out, _dir) = run(
        "validate",
        &bundled("fig1-standard.json"),
        &["--solver-opt-tol", "10"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("fail"));
}
