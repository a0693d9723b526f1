use std::process::{Command, Output};

use serde_json::Value;

fn srht(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srht")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn bounds_report_for_the_desk_configuration() {
    let out = srht(&["bounds", "--k", "16", "--n", "65536"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.contains("\"thm31_ell\": 2342"), "{text}");
    let doc = json(&out);
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["thm31_window_rounded"], serde_json::json!([0.4, 1.48]));
    assert!((doc["row_norm"]["bound"].as_f64().unwrap() - 0.05676201324584624).abs() < 1e-14);
    assert_eq!(doc["thm32"]["constants_verified"], false);
}

#[test]
fn bounds_csv_has_header() {
    let out = srht(&["bounds", "--k", "16", "--n", "4096", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("quantity,value\n"));
    assert!(text.contains("\nk,16\n"));
}

#[test]
fn full_sampling_sketch_is_isometric() {
    let out = srht(&["sketch", "--n", "4", "--l", "4", "--k", "2", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let sv: Vec<f64> = doc["singular_values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(sv.len(), 2);
    assert!(sv.iter().all(|s| (s - 1.0).abs() < 1e-12), "{sv:?}");
    assert_eq!(doc["operator"]["seed"], 1);
    assert_eq!(doc["sketch"]["rows"], 4);
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [
        &["sketch", "--n", "64", "--l", "12", "--k", "3", "--seed", "9", "--explicit"][..],
        &["experiment", "coupon", "--k", "4", "--trials", "300", "--seed", "5"][..],
        &["experiment", "mgf", "--exhaustive"][..],
        &["experiment", "rownorm", "--n", "256", "--k", "4", "--trials", "50", "--format", "csv"][..],
    ] {
        let (a, b) = (srht(args), srht(args));
        assert_eq!(a.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn experiment_document_shape() {
    let out = srht(&["experiment", "chernoff", "--exhaustive"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["experiment"], "chernoff");
    assert_eq!(doc["config"]["mode"], "exhaustive");
    assert_eq!(doc["all_passed"], true);
    let summaries = doc["summaries"].as_array().unwrap();
    assert_eq!(summaries.len(), 18);
    assert!(summaries.iter().all(|s| s["elapsed_seconds"] == 0.0));
}

#[test]
fn output_path_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("flatten.csv");
    let matrix = dir.path().join("sketch.csv");
    let out = srht(&[
        "experiment",
        "flatten",
        "--n",
        "512",
        "--trials",
        "20",
        "--format",
        "csv",
        "--output_path",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.starts_with("name,n,k,ell,trials,mode,"));
    assert_eq!(text.lines().count(), 2);

    let out = srht(&[
        "sketch", "--n", "16", "--l", "8", "--k", "2", "--matrix_path", matrix.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let m = srht::linalg::DenseMatrix::read_csv(std::io::BufReader::new(std::fs::File::open(&matrix).unwrap()))
        .unwrap();
    assert_eq!((m.rows(), m.cols()), (8, 2));
}

#[test]
fn usage_errors_exit_two_with_one_line() {
    for args in [
        &["bounds", "--k", "16"][..],
        &["sketch", "--n", "12", "--l", "4", "--k", "2"][..],
        &["sketch", "--n", "16", "--l", "32", "--k", "2"][..],
        &["experiment", "coupon", "--ells", "0"][..],
        &["frobnicate"][..],
    ] {
        let out = srht(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("error: "), "{err}");
    }
}

#[test]
fn failing_experiment_exits_one() {
    // With l = k the embedding window fails in nearly every trial, far above 3/k.
    let out = srht(&["experiment", "embedding", "--n", "1024", "--k", "32", "--l", "32", "--trials", "50"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["all_passed"], false);
}
