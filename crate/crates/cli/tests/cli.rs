use std::process::{Command, Output};

use nfold_svd::char_equation::CharEquation;
use nfold_svd::eigen_solver::singular_values;
use nfold_svd::numerics::{parse_decimal, to_decimal};
use nfold_svd::PrecisionContext;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nfold-svd"))
        .args(args)
        .env_remove("NFOLD_BITS")
        .output()
        .expect("binary runs")
}

fn stdout_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_str().unwrap().parse().unwrap()
}

#[test]
fn eigensystem_n2_matches_published_lambdas() {
    let doc = stdout_json(&["eigensystem", "--n", "2", "--count", "5"]);
    let expect = [0.0808907, 0.0020597, 0.0002627, 0.0000684, 0.0000250];
    let records = doc["records"].as_array().unwrap();
    assert_eq!(records.len(), 5);
    for (r, l) in records.iter().zip(expect) {
        assert!((num(&r["lambda"]) - l).abs() < 5e-8);
        assert_eq!(r["gamma"].as_array().unwrap().len(), 4);
    }
}

#[test]
fn eigensystem_n1_singular_values() {
    let doc = stdout_json(&["eigensystem", "--n", "1", "--count", "3"]);
    for (k, r) in doc["records"].as_array().unwrap().iter().enumerate() {
        let expect = 2.0 / ((2 * k + 1) as f64 * std::f64::consts::PI);
        assert!((num(&r["sigma"]) - expect).abs() < 1e-15);
    }
}

#[test]
fn eigensystem_n3_zeros() {
    let doc = stdout_json(&["eigensystem", "--n", "3", "--count", "5"]);
    let table = [
        "2.2247729764011889",
        "4.8026572459190195",
        "7.8476475910871745",
        "10.9951601546635699",
        "14.1371941952108977",
    ];
    for (r, t) in doc["records"].as_array().unwrap().iter().zip(table) {
        let z = parse_decimal(r["z"].as_str().unwrap(), 256).unwrap();
        let d = (z - parse_decimal(t, 256).unwrap()).abs().to_f64();
        assert!(d < 1e-15, "{t}: {d:e}");
    }
}

#[test]
fn eigensystem_json_round_trips() {
    let doc = stdout_json(&["eigensystem", "--n", "4", "--count", "3", "--bits", "192"]);
    let digits = doc["digits"].as_u64().unwrap() as usize;
    let ctx = PrecisionContext::new(192).unwrap();
    let recs = singular_values(4, 3, &ctx).unwrap();
    for (r, rec) in doc["records"].as_array().unwrap().iter().zip(&recs) {
        let z = parse_decimal(r["z"].as_str().unwrap(), 192).unwrap();
        assert_eq!(to_decimal(&z, digits), to_decimal(&rec.z, digits));
    }
}

#[test]
fn eigensystem_csv_columns() {
    let out = run(&["eigensystem", "--n", "2", "--count", "2", "--format", "csv", "--normalization", "last-one"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "i,z,lambda,sigma,epsilon,gamma_1,gamma_2,gamma_3,gamma_4");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[8], "1");
    assert!(row[5].starts_with("0.13295224"));
}

#[test]
fn precision_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_nfold-svd"))
        .args(["eigensystem", "--n", "1", "--count", "1"])
        .env("NFOLD_BITS", "128")
        .output()
        .unwrap();
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["bits"], 128);
}

#[test]
fn charpoly_forms() {
    let text = |n: &str| String::from_utf8(run(&["charpoly", "--n", n]).stdout).unwrap();
    assert_eq!(text("2").trim(), "cosh(z)*cos(z) + 1 = 0");
    assert_eq!(text("1").trim(), "cos(z) = 0");
    assert!(text("3").contains("cosh(1.7320508075688772935*z)*cos(z)"));
    let out = run(&["charpoly", "--n", "3", "--format", "json"]);
    let ctx = PrecisionContext::new(256).unwrap();
    let f = CharEquation::from_json(std::str::from_utf8(&out.stdout).unwrap(), &ctx).unwrap();
    let mut coeffs: Vec<f64> = f.terms.iter().map(|t| t.coeff.to_f64()).collect();
    coeffs.sort_by(f64::total_cmp);
    let expect = [0.5, 1.0, 4.0, 4.5, 8.0];
    for (c, e) in coeffs.iter().zip(expect) {
        assert!((c - e).abs() < 1e-30);
    }
}

#[test]
fn epsilon_coefficients() {
    let doc = stdout_json(&["epsilon"]);
    let got: Vec<&str> = doc["coefficients"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(got, ["-2", "-4", "-34/3", "-112/3", "-2006/15", "-1516/3"]);
    let one = stdout_json(&["epsilon", "--count", "1"]);
    assert_eq!(one["coefficients"][0], "-2");
    let out = run(&["epsilon", "--count", "101"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn epsilon_order_twenty_tracks_roots() {
    let doc = stdout_json(&["epsilon", "--count", "20"]);
    let ctx = PrecisionContext::new(256).unwrap();
    let a: Vec<rug::Rational> = doc["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().parse().unwrap())
        .collect();
    for r in singular_values(2, 8, &ctx).unwrap().iter().skip(1) {
        let x = (-r.zeta.clone()).exp() * if r.i % 2 == 1 { -1 } else { 1 };
        let mut est = rug::Float::new(256);
        for c in a.iter().rev() {
            est = (est + c) * &x;
        }
        let rel = ((est - &r.epsilon) / &r.epsilon).abs().to_f64();
        assert!(rel < 1e-20, "i={} rel={rel:e}", r.i);
    }
}

#[test]
fn differentiate_ones_reports_true_error() {
    let doc = stdout_json(&["differentiate", "--n", "1", "--example", "ones", "--cutoff", "25", "--bits", "128"]);
    assert_eq!(doc["N"], 25);
    let pi = std::f64::consts::PI;
    let tail = (1.0 - (1..=25).map(|i| 2.0 / ((i as f64 - 0.5) * pi).powi(2)).sum::<f64>()).sqrt();
    assert!((num(&doc["l2_error_if_truth_known"]) - tail).abs() < 1e-12);
    let data_tail = (1.0 / 3.0 - (1..=25).map(|i| 2.0 / ((i as f64 - 0.5) * pi).powi(4)).sum::<f64>()).sqrt();
    assert!((num(&doc["discrepancy"]) - data_tail).abs() < 1e-12);
}

#[test]
fn differentiate_auto_selects_cutoff() {
    let args = [
        "differentiate", "--n", "2", "--example", "sine", "--delta", "1e-3", "--seed", "4", "--count", "12",
        "--bits", "128",
    ];
    let doc = stdout_json(&args);
    assert_eq!(doc["cutoff_rule"], "discrepancy");
    assert_eq!(doc["cap_reached"], false);
    let n = doc["N"].as_u64().unwrap();
    assert!((1..=12).contains(&n));
    assert!(num(&doc["discrepancy"]) <= 1.5e-3);
    let out = run(&["differentiate", "--n", "2", "--example", "sine", "--cutoff", "auto"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn differentiate_fixed_cutoff_is_deterministic() {
    let args = [
        "differentiate", "--n", "1", "--example", "sine", "--delta", "1e-2", "--seed", "9", "--cutoff", "5",
        "--count", "6", "--bits", "128",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mut csv_args = args.to_vec();
    csv_args.extend(["--format", "csv", "--points", "11"]);
    let c = run(&csv_args);
    let text = String::from_utf8(c.stdout).unwrap();
    assert_eq!(text.lines().count(), 12);
    assert!(text.starts_with("t,x\n0,"));
}

#[test]
fn differentiate_reads_samples() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ramp.csv");
    let mut body = String::from("t,value\n");
    for j in 0..=40 {
        let t = j as f64 / 40.0;
        body.push_str(&format!("{t},{t}\n"));
    }
    std::fs::write(&path, body).unwrap();
    let doc = stdout_json(&[
        "differentiate", "--n", "1", "--input", path.to_str().unwrap(), "--cutoff", "3", "--count", "3", "--bits",
        "128",
    ]);
    assert!(doc["l2_error_if_truth_known"].is_null());
    let pi = std::f64::consts::PI;
    for (k, c) in doc["coefficients"].as_array().unwrap().iter().enumerate() {
        let i = k as f64 + 1.0;
        let expect = if k % 2 == 0 { 1.0 } else { -1.0 } * 2f64.sqrt() / ((i - 0.5) * pi);
        assert!((num(c) - expect).abs() < 1e-12);
    }
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "0,0\n0.5,1\n0.4,2\n").unwrap();
    let out = run(&["differentiate", "--n", "1", "--input", bad.to_str().unwrap(), "--cutoff", "1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_flags_forced_failure() {
    let out = run(&["verify", "--bits", "128", "--force-failure"]);
    assert_eq!(out.status.code(), Some(1));
    let table = String::from_utf8(out.stdout).unwrap();
    let failing: Vec<&str> = table.lines().filter(|l| l.contains(" FAIL ")).collect();
    assert_eq!(failing.len(), 1);
    assert!(failing[0].starts_with("forced-failure"));
    assert!(table.lines().next().unwrap().contains("seconds"));
}

#[test]
fn verify_passes_at_defaults() {
    let out = run(&["verify", "--format", "json"]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(out.status.success(), "{report:#}");
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn plotdata_grids() {
    for n in ["2", "4"] {
        let out = run(&["plotdata", "--n", n]);
        let text = String::from_utf8(out.stdout).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,u_1,u_2,u_3,u_4,u_5");
        assert_eq!(lines.len(), 513);
        let last: Vec<f64> = lines[512].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(last[0], 1.0);
        assert!(last[1..].iter().all(|u| u.abs() < 1e-15));
        let h = 1.0 / 511.0;
        for col in 1..=5 {
            let vals: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect();
            let sq: f64 = vals.windows(2).map(|w| (w[0] * w[0] + w[1] * w[1]) / 2.0 * h).sum();
            assert!((sq - 1.0).abs() < 1e-3, "n={n} col={col} {sq}");
        }
    }
}

#[test]
fn output_file_and_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.txt");
    let out = run(&["charpoly", "--n", "2", "--output", path.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap().trim(), "cosh(z)*cos(z) + 1 = 0");
    for args in [
        vec!["eigensystem", "--n", "0"],
        vec!["eigensystem", "--bits", "32"],
        vec!["charpoly", "--format", "csv"],
        vec!["eigensystem", "--normalization", "max"],
        vec!["differentiate", "--example", "ones", "--cutoff", "many"],
        vec!["unknown-command"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(3), "{args:?}");
        let err: Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_eq!(err["exit_code"], 3);
        assert!(err["message"].is_string());
    }
}
