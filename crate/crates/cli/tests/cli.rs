use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gibbs-spectra"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn example(dir: &TempDir) -> PathBuf {
    write(dir, "example.json", r#"{"nx": 2, "ny": 2, "p": [0.4, 0.1, 0.1, 0.4]}"#)
}

fn analyze_json(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(&stdout(&out)).unwrap()
}

fn close(v: &Value, expected: f64, tol: f64) -> bool {
    (v.as_f64().unwrap() - expected).abs() < tol
}

#[test]
fn gen_writes_a_normalized_five_by_five_table() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = run(&["gen", "5", "5", "--seed", "7", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        assert!(stdout(&out).contains(path.to_str().unwrap()));
    }
    let value: Value = serde_json::from_str(&fs::read_to_string(&a).unwrap()).unwrap();
    let p: Vec<f64> = value["p"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(p.len(), 25);
    assert!(p.iter().all(|&v| v > 0.0));
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn gen_rejects_a_single_row() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["gen", "1", "2", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("assumption one violated"));
}

#[test]
fn analyze_the_example() {
    let dir = TempDir::new().unwrap();
    let path = example(&dir);
    let value = analyze_json(&["analyze", path.to_str().unwrap(), "--r", "0.5"]);
    assert!(close(&value["rho_d"], 0.36, 1e-12));
    assert!(close(&value["rho_r"], 0.8, 1e-12));
    assert!(close(&value["maximal_correlation"], 0.6, 1e-12));
    assert!(value.get("rho_dc").is_none());

    let value = analyze_json(&["analyze", path.to_str().unwrap(), "--proposal", "independence"]);
    assert!(close(&value["C"], 1.6, 1e-12));
    assert!(close(&value["C1"], 1.6, 1e-12));
    for key in ["rho_dc", "rho_rc", "rho_dcmm", "rho_rcmm"] {
        assert!(value[key].is_f64(), "{key}");
    }
}

#[test]
fn analyze_a_product_pmf() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "product.json", r#"{"nx": 2, "ny": 3, "p": [0.1, 0.2, 0.2, 0.1, 0.2, 0.2]}"#);
    let value = analyze_json(&["analyze", path.to_str().unwrap(), "--r", "0.3"]);
    assert!(close(&value["rho_d"], 0.0, 1e-12));
    assert!(close(&value["rho_r"], 0.7, 1e-12));
}

#[test]
fn analyze_the_counterexample_with_swaps() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["counterexample", "--out", "ce.json", "--proposal-out", "swap.json"]);
    assert_eq!(out.status.code(), Some(0));
    let joint = dir.path().join("ce.json");
    let value = analyze_json(&["analyze", joint.to_str().unwrap(), "--proposal", "swap", "--r", "0.5"]);
    assert!(close(&value["rho_dc"], 1.0, 1e-12));
    assert!(close(&value["rho_rc"], 0.5, 1e-10));
    assert_eq!(value["C"], "infinity");

    let swap = format!("file:{}", dir.path().join("swap.json").display());
    let value = analyze_json(&["analyze", joint.to_str().unwrap(), "--proposal", &swap]);
    assert!(close(&value["rho_dc"], 1.0, 1e-12));
    assert!(value.get("rho_dcmm").is_none());
}

#[test]
fn analyze_writes_decay_and_norm_csv() {
    let dir = TempDir::new().unwrap();
    let path = example(&dir);
    let decay = dir.path().join("decay.csv");
    let norms = dir.path().join("norms.csv");
    let kernel = dir.path().join("kernel.json");
    let value = analyze_json(&[
        "analyze",
        path.to_str().unwrap(),
        "--kernel",
        "rg",
        "--decay-csv",
        decay.to_str().unwrap(),
        "--norm-csv",
        norms.to_str().unwrap(),
        "--kernel-out",
        kernel.to_str().unwrap(),
    ]);
    assert!((value["decay"]["fitted_rate"].as_f64().unwrap() - 0.8).abs() < 0.008);
    let text = fs::read_to_string(&decay).unwrap();
    assert!(text.starts_with("n,chi_square,tv\n0,"));
    assert_eq!(text.lines().count(), 32);
    assert!(fs::read_to_string(&norms).unwrap().starts_with("n,norm\n1,"));
    let k: Value = serde_json::from_str(&fs::read_to_string(&kernel).unwrap()).unwrap();
    assert_eq!(k["P"].as_array().unwrap().len(), 16);
    assert_eq!(k["reversible"], true);
}

#[test]
fn verify_the_full_corpus() {
    let out = run(&["verify", "--corpus", "100", "--seed", "11", "--r", "0.1,0.3,0.5,0.7,0.9"]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("theorem1"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn verify_the_counterexample_skips_gated_arrows() {
    let dir = TempDir::new().unwrap();
    run_in(dir.path(), &["counterexample", "--out", "ce.json"]);
    let report = dir.path().join("reports.json");
    let out = run_in(
        dir.path(),
        &["verify", "ce.json", "--proposal", "swap", "--out", report.to_str().unwrap()],
    );
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("C is not finite"));
    let reports: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!(reports
        .as_array()
        .unwrap()
        .iter()
        .any(|r| r["report"]["claim"] == "minorizations" && r["report"]["outcome"] == "skipped"));
}

#[test]
fn verify_rejects_corrupt_json() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "bad.json", "{\"nx\": 2, \"ny\"");
    assert_eq!(run(&["verify", path.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["verify"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--corpus", "2", "--r", "1.5"]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "/nonexistent/joint.json"]).status.code(), Some(2));
}

#[test]
fn verify_reports_failures_with_exit_one() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "j.json", r#"{"nx": 2, "ny": 2, "p": [0.3, 0.2, 0.1, 0.4]}"#);
    let out = run(&["verify", path.to_str().unwrap(), "--tol", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn figure2_rows_and_determinism() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = run(&["figure2", "--count", "20", "--seed", "5", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,rho_d,rho_r_computed,rho_r_formula"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 60);
    for row in &rows {
        assert!((row[2] - row[3]).abs() < 1e-8);
    }
    assert_eq!(rows[0][0], 0.25);
    assert_eq!(rows[1][0], 0.5);
    assert_eq!(rows[2][0], 0.75);
}

#[test]
fn figure2_with_an_injected_product_pmf() {
    let dir = TempDir::new().unwrap();
    let joint = write(&dir, "product.json", r#"{"nx": 2, "ny": 2, "p": [0.25, 0.25, 0.25, 0.25]}"#);
    let csv = dir.path().join("f.csv");
    let out = run(&[
        "figure2",
        "--joint",
        joint.to_str().unwrap(),
        "--r",
        "0.5",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&csv).unwrap();
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(row[0], 0.5);
    assert!(row[1].abs() < 1e-12);
    assert!((row[2] - 0.5).abs() < 1e-12 && (row[3] - 0.5).abs() < 1e-12);
}

#[test]
fn figure2_is_independent_of_thread_count() {
    let dir = TempDir::new().unwrap();
    let serial = dir.path().join("serial.csv");
    let pooled = dir.path().join("pooled.csv");
    for (path, threads) in [(&serial, "0"), (&pooled, "3")] {
        let out = bin()
            .env("GIBBS_SPECTRA_THREADS", threads)
            .args(["figure2", "--count", "6", "--seed", "1", "--out", path.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(fs::read(&serial).unwrap(), fs::read(&pooled).unwrap());
}

#[test]
fn gauss_results() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("g.json");
    let out = run(&["gauss", "--gamma", "0.9,0,0.5", "--seed", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let results: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let results = results.as_array().unwrap();
    assert_eq!(results.len(), 3);
    assert!(close(&results[0]["theory_rho_d"], 0.81, 1e-12));
    assert!(close(&results[0]["theory_rho_r"], 0.95, 1e-12));
    assert!(close(&results[1]["lag1_autocorr_x"], 0.0, 0.02));
    assert!(close(&results[2]["lag1_autocorr_x"], 0.25, 0.02));
}

#[test]
fn gauss_rejects_unit_correlation() {
    assert_eq!(run(&["gauss", "--gamma", "1.0"]).status.code(), Some(2));
}
