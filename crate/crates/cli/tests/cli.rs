//! End-to-end command behavior: flags, exit codes, output formats, file
//! round-trips.

use std::process::Command;

fn run(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_sixsoid"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
        out.status.code().unwrap_or(-1),
    )
}

fn json(stdout: &str) -> serde_json::Value {
    serde_json::from_str(stdout).expect("valid JSON output")
}

#[test]
fn volume_json_and_csv() {
    let (stdout, _, code) = run(&["volume", "--radius", "2", "--quantity", "sixsoid"]);
    assert_eq!(code, 0);
    let v = json(&stdout);
    let value = v["value"].as_f64().unwrap();
    assert!((value - 8.0 * 0.687636784).abs() < 1e-6);
    assert!((v["per_unit_radius_cubed"].as_f64().unwrap() - 0.687636784).abs() < 1e-6);

    let (stdout, _, code) = run(&[
        "volume", "--radius", "1", "--quantity", "kprofile", "--format", "csv",
    ]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "k,volume,estimated_error");
    assert_eq!(lines.len(), 7);
    // k = 3 row covers the whole cube.
    assert!(lines[3].starts_with("3,"));
    let k3: f64 = lines[3].split(',').nth(1).unwrap().parse().unwrap();
    assert!((k3 - 1.0).abs() < 1e-9);
}

#[test]
fn volume_rejects_bad_arguments() {
    let (_, stderr, code) = run(&["volume", "--radius", "-1", "--quantity", "sixsoid"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("positive"));
    let (_, _, code) = run(&["volume", "--radius", "1", "--quantity", "nonsense"]);
    assert_eq!(code, 1);
}

#[test]
fn slice_reports_z_scores_and_k_variants() {
    let (stdout, _, code) = run(&[
        "slice", "--radius", "1", "--x", "0.5", "--samples", "200000",
    ]);
    assert_eq!(code, 0);
    let v = json(&stdout);
    assert!((v["analytic"].as_f64().unwrap() - 0.873248502).abs() < 1e-6);
    assert!(v["z_score"].as_f64().unwrap().abs() < 4.0);

    // k = 3 at the top face: whole slice covered, no analytic value reported.
    let (stdout, _, code) = run(&[
        "slice", "--radius", "1", "--x", "0", "--k", "3", "--samples", "100000",
    ]);
    assert_eq!(code, 0);
    let v = json(&stdout);
    assert!(v["analytic"].is_null());
    assert_eq!(v["sampled"].as_f64().unwrap(), 1.0);

    let (_, stderr, code) = run(&["slice", "--radius", "1", "--x", "1.5"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("outside"));
}

#[test]
fn slice_sweep_emits_profile_csv() {
    let (stdout, _, code) = run(&["slice", "--radius", "1", "--sweep", "10"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "x,area");
    assert_eq!(lines.len(), 12);
    let first: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(first, 0.0);
}

#[test]
fn plan_round_trips_through_its_own_output() {
    let dir = std::env::temp_dir().join(format!("sixsoid-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let foi = dir.join("foi.json");
    let plan = dir.join("plan.json");
    std::fs::write(&foi, r#"{"cell_size": 1.0, "dims": [2, 2, 2]}"#).unwrap();

    let (stdout, _, code) = run(&[
        "plan",
        "--foi",
        foi.to_str().unwrap(),
        "--out",
        plan.to_str().unwrap(),
        "--samples",
        "100000",
    ]);
    assert_eq!(code, 0);
    let first = json(&stdout);
    assert_eq!(first["sensor_count"].as_u64().unwrap(), 36);
    assert!((first["formula_count"].as_f64().unwrap() - 24.0).abs() < 1e-12);
    assert_eq!(first["coverage"]["min_observed_coverage"].as_u64().unwrap(), 3);

    // The written plan is accepted by the coverage re-check path and gives
    // identical statistics.
    let (stdout, _, code) = run(&[
        "plan",
        "--foi",
        foi.to_str().unwrap(),
        "--verify-plan",
        plan.to_str().unwrap(),
        "--samples",
        "100000",
    ]);
    assert_eq!(code, 0);
    let second = json(&stdout);
    assert_eq!(first["coverage"], second["coverage"]);

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn plan_rejects_malformed_input_naming_the_field() {
    let dir = std::env::temp_dir().join(format!("sixsoid-cli-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let foi = dir.join("foi.json");

    std::fs::write(&foi, r#"{"cells": [[0,0,0]]}"#).unwrap();
    let (_, stderr, code) = run(&["plan", "--foi", foi.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stderr.contains("cell_size"), "stderr: {stderr}");

    std::fs::write(&foi, r#"{"cell_size": 1.0, "cells": []}"#).unwrap();
    let (_, stderr, code) = run(&["plan", "--foi", foi.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stderr.contains("non-empty"), "stderr: {stderr}");

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn tables_enforce_flag_combinations() {
    let (_, _, code) = run(&["tables", "--which", "volume"]);
    assert_eq!(code, 1, "--radii is required for the volume table");
    let (_, _, code) = run(&["tables", "--which", "density", "--r", "25"]);
    assert_eq!(code, 1, "--kmax is required for the density table");
    let (stdout, _, code) = run(&["tables", "--which", "density", "--r", "25", "--kmax", "4"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 2, "kmax 4 gives a single row");
    let fields: Vec<&str> = lines[1].split(',').collect();
    let reu: f64 = fields[1].parse().unwrap();
    let six: f64 = fields[2].parse().unwrap();
    assert!(six < reu, "sixsoid density must undercut reuleaux");
}

#[test]
fn validate_passes_and_fault_injection_fails() {
    let (stdout, _, code) = run(&[
        "validate",
        "--samples",
        "400000",
        "--slice-samples",
        "100000",
    ]);
    assert_eq!(code, 0, "validation should pass: {stdout}");
    let v = json(&stdout);
    assert_eq!(v["pass"].as_bool(), Some(true));

    let (stdout, stderr, code) = run(&[
        "validate",
        "--samples",
        "400000",
        "--slice-samples",
        "100000",
        "--inject-fault",
        "chord",
    ]);
    assert_eq!(code, 2, "fault injection must fail validation");
    let v = json(&stdout);
    assert_eq!(v["pass"].as_bool(), Some(false));
    let failed: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["slice-oracle-equivalence"]);
    assert!(stderr.contains("validation failed"));
}

#[test]
fn same_flags_same_output() {
    let args = ["slice", "--radius", "1", "--x", "0.37", "--samples", "150000"];
    let (a, _, _) = run(&args);
    let (b, _, _) = run(&args);
    assert_eq!(a, b);
}
