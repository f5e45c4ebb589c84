use std::process::{Command, Output};

use serde_json::Value;

fn lpvol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpvol")).args(args).output().expect("spawn lpvol")
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let o = lpvol(&full);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("valid json")
}

fn has_fixed_keys(v: &Value) {
    for key in ["command", "params", "value", "err_estimate", "method"] {
        assert!(v.get(key).is_some(), "missing {key} in {v}");
    }
}

#[test]
fn diagonal_beats_a2_in_dimension_100() {
    let big = json(&["section", "--n", "100", "--p", "3", "--dir", "diag:100"]);
    let small = json(&["section", "--n", "100", "--p", "3", "--dir", "diag:2"]);
    has_fixed_keys(&big);
    assert!(big["value"].as_f64().unwrap() > small["value"].as_f64().unwrap());
}

#[test]
fn a2_closed_form() {
    let v = json(&["section", "--n", "7", "--p", "4", "--dir", "diag:2"]);
    assert!((v["value"].as_f64().unwrap() - 2f64.powf(0.25)).abs() < 1e-8);
    let v = json(&["projection", "--n", "6", "--q", "1.5", "--dir", "diag:2"]);
    assert!((v["value"].as_f64().unwrap() - 2f64.powf(0.5 - 1.0 / 1.5)).abs() < 1e-8);
}

#[test]
fn explicit_vector_direction() {
    let v = json(&["section", "--p", "2", "--dir", "vec:0.6,0.8,0"]);
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert_eq!(v["params"]["n"], 3);
}

#[test]
fn roots_json() {
    let v = json(&["roots"]);
    has_fixed_keys(&v);
    let p0 = v["p0"].as_f64().unwrap();
    assert!((p0 - 26.265).abs() < 1e-3, "{p0}");
    assert!(v["p1_section"].is_number());
    assert!(v["q1_projection"].is_number());
    assert!(v["f_min_location"].is_number());
}

#[test]
fn kernel_values() {
    let v = json(&["kernel", "--p", "2", "--s", "1"]);
    // both kernels reduce to exp(-s²/4) at the Gaussian exponent
    let expected = (-0.25f64).exp();
    assert!((v["value"].as_f64().unwrap() - expected).abs() < 1e-11);
    let v = json(&["kernel", "--q", "2", "--s", "1"]);
    assert!((v["value"].as_f64().unwrap() - expected).abs() < 1e-11);
}

#[test]
fn scan_rows_and_best() {
    let v = json(&["scan", "--p", "3", "--n", "10"]);
    has_fixed_keys(&v);
    assert_eq!(v["rows"].as_array().unwrap().len(), 10);
    assert!(v["best_k"].is_number());
}

#[test]
fn crossover_csv_is_parseable() {
    let o = lpvol(&["--format", "csv", "crossover", "--q", "1.6", "--n-max", "40"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(&headers[0], "n");
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert!(rows.len() >= 38);
    let margin: f64 = rows[0][3].parse().unwrap();
    assert!(margin.is_finite());
}

#[test]
fn oracle_agrees() {
    let v = json(&["oracle", "--p", "3", "--n", "4", "--dir", "diag:4", "--samples", "20000", "--seed", "11"]);
    assert_eq!(v["agree"], true, "{v}");
}

#[test]
fn out_file_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = lpvol(&["--format", "json", "--out", path.to_str().unwrap(), "section", "--n", "5", "--p", "2", "--dir", "diag:3"]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    has_fixed_keys(&v);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope").join("r.csv");
    let cases: [&[&str]; 6] = [
        &["section", "--n", "5", "--p", "0.9", "--dir", "diag:2"],
        &["projection", "--n", "5", "--q", "1", "--dir", "diag:2"],
        &["section", "--n", "1", "--p", "3", "--dir", "diag:1"],
        &["section", "--n", "3", "--p", "3", "--dir", "vec:1,1,1"],
        &["frobnicate"],
        &["--out", missing.to_str().unwrap(), "roots"],
    ];
    for args in cases {
        assert_eq!(lpvol(args).status.code(), Some(2), "{args:?}");
    }
}
