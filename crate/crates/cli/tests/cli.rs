use std::process::{Command, Output};
use std::time::{Duration, Instant};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_classicality")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).expect("utf-8")
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn qubit_value() {
    let v = json(&["compute", "--n", "2", "--stratum", "1,1"]);
    let q: f64 = v["value"].as_str().unwrap().parse().unwrap();
    assert!((q - 0.1924500897).abs() < 1e-10);
    assert_eq!(v["value_exact"], "1/9*sqrt(3)");
    assert_eq!(v["method"], "la");
}

#[test]
fn degenerate_qutrit_at_zero() {
    let v = json(&["compute", "--n", "3", "--stratum", "2,1", "--moduli", "0"]);
    assert_eq!(v["value"], "0.03125");
    assert_eq!(v["value_exact"], "1/32");
    assert_eq!(v["arithmetic"], "rational");
}

#[test]
fn maximal_stratum_is_one() {
    let v = json(&["compute", "--n", "3", "--stratum", "3", "--moduli", "0"]);
    assert_eq!(v["value"], "1");
}

#[test]
fn spectrum_input_is_exact_when_possible() {
    let v = json(&["compute", "--n", "3", "--spectrum", "-1,1,1"]);
    assert_eq!(v["value_exact"], "1/256");
    let v = json(&["compute", "--n", "3", "--spectrum", "1,1,-1", "--arith", "double", "--method", "lasserre"]);
    assert_eq!(v["arithmetic"], "double");
    assert!((v["value"].as_str().unwrap().parse::<f64>().unwrap() - 1.0 / 256.0).abs() < 1e-15);
}

#[test]
fn invalid_spectrum_exits_two_with_residuals() {
    let out = run(&["compute", "--n", "3", "--spectrum", "1,1,-0.9"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("trace residual") && err.contains("square residual"), "{err}");
}

#[test]
fn out_of_chamber_moduli_exit_two() {
    let out = run(&["compute", "--n", "3", "--moduli", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn capacity_error_exits_three() {
    let out = run(&["compute", "--n", "6", "--method", "la", "--moduli", "0.3,0.3,0.3,0.3"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn monte_carlo_is_reproducible() {
    let args = ["compute", "--n", "3", "--moduli", "0.4", "--method", "mc", "--mc-samples", "50000", "--seed", "7"];
    let a = json(&args);
    assert_eq!(a, json(&args));
    assert_eq!(a["seed"], 7);
    assert!(a["stderr"].as_f64().unwrap() > 0.0);
}

#[test]
fn qutrit_scan_curves() {
    let (header, rows) = csv_rows(&stdout(&["scan", "--n", "3", "--grid", "50"]));
    assert_eq!(header, ["zeta", "stratum", "q_value", "method", "flag"]);
    assert_eq!(rows.len(), 100);
    let mut min_regular = f64::INFINITY;
    for pair in rows.chunks(2) {
        assert_eq!(pair[0][0], pair[1][0]);
        assert_eq!((pair[0][1].as_str(), pair[1][1].as_str()), ("1+1+1", "2+1"));
        let reg: f64 = pair[0][2].parse().unwrap();
        let deg: f64 = pair[1][2].parse().unwrap();
        assert!(deg > reg);
        min_regular = min_regular.min(reg);
        assert!(pair.iter().all(|r| r[4] == "ok"), "{pair:?}");
    }
    assert!(min_regular > 0.0);
}

#[test]
fn quatrit_scan_row_count() {
    let (header, rows) = csv_rows(&stdout(&["scan", "--n", "4", "--grid", "20", "--stratum", "all"]));
    assert_eq!(header, ["psi1", "psi2", "stratum", "q_value", "method", "flag"]);
    assert_eq!(rows.len(), 400 * 5);
    assert!(rows.iter().all(|r| r[5] != "disputed"));
    assert!(rows.iter().filter(|r| r[2] == "4").all(|r| r[3] == "1"));
}

#[test]
fn scan_is_deterministic_across_thread_counts() {
    let args = ["scan", "--n", "4", "--grid", "6", "--stratum", "1,1,1,1;2,2"];
    let a = stdout(&args);
    let single = Command::new(env!("CARGO_BIN_EXE_classicality"))
        .args(args)
        .env("CLASSICALITY_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.as_bytes(), single.stdout.as_slice());
    assert_eq!(a, stdout(&args));
    assert!(!a.contains('\r'));
}

#[test]
fn csv_and_json_agree() {
    let dir = std::env::temp_dir().join(format!("classicality-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("scan.csv");
    let base = ["scan", "--n", "3", "--grid", "7", "--stratum", "all"];
    let mut csv_args = base.to_vec();
    csv_args.extend(["--output", path.to_str().unwrap()]);
    assert!(stdout(&csv_args).is_empty());
    let (header, rows) = csv_rows(&std::fs::read_to_string(&path).unwrap());
    let mut json_args = base.to_vec();
    json_args.extend(["--format", "json"]);
    let doc = json(&json_args);
    let jheader: Vec<String> = serde_json::from_value(doc["columns"].clone()).unwrap();
    let jrows: Vec<Vec<String>> = serde_json::from_value(doc["rows"].clone()).unwrap();
    assert_eq!(header, jheader);
    assert_eq!(rows, jrows);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_fast_passes() {
    let start = Instant::now();
    let text = stdout(&["verify", "--level", "fast"]);
    assert!(start.elapsed() < Duration::from_secs(60));
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 9, "{text}");
    assert!(text.contains("9/9 checks passed"));
}
