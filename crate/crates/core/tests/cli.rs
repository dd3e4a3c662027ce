use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_telecluster"));
    cmd.env_remove("TELECLUSTER_QUBIT_CAP");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn teleport_computational_n1_is_perfect() {
    let out = run(&["teleport", "--n", "1", "--computational", "--seed", "7", "--exhaustive"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row["trial"], 0);
        assert_eq!(row["outcome"].as_array().unwrap().len(), 1);
        assert_eq!(row["outcome"][0].as_u64().unwrap(), i as u64);
        assert!((row["probability"].as_f64().unwrap() - 0.25).abs() < 1e-12);
        assert!(row["fidelity"].as_f64().unwrap() > 1.0 - 1e-10);
        assert_eq!(row["bob_post"]["num_qubits"], 1);
    }
}

#[test]
fn teleport_given_state_through_random_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(
        dir.path(),
        "phi.json",
        r#"{"num_qubits": 2, "amps": [[0.5,0],[0,0.5],[-0.5,0],[0,-0.5]]}"#,
    );
    let out = run(&[
        "teleport", "--n", "2", "--random-schedule", "--state", &state, "--seed", "3", "--trials", "4",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = json(&out);
    assert_eq!(rows.as_array().unwrap().len(), 4);
    for row in rows.as_array().unwrap() {
        assert!(row["fidelity"].as_f64().unwrap() > 1.0 - 1e-10);
        assert!((row["probability"].as_f64().unwrap() - 1.0 / 16.0).abs() < 1e-12);
    }
}

#[test]
fn schedule_file_with_both_sides() {
    let dir = tempfile::tempdir().unwrap();
    let sched = write(
        dir.path(),
        "s.json",
        r#"{"a": {"n":2,"levels":[[0.3],[0.1,1.2]]}, "b": {"n":2,"levels":[[0.9],[0.4,0.5]]}}"#,
    );
    let out = run(&["teleport", "--schedule", &sched, "--exhaustive", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "trial,outcome_bits,outcome_labels,probability,correction_bits,fidelity"
    );
    assert_eq!(lines.count(), 16);
    assert!(text.contains("0,1101,"));
}

#[test]
fn inline_angles_win_over_schedule_file() {
    let dir = tempfile::tempdir().unwrap();
    let sched = write(dir.path(), "s.json", r#"{"n":1,"levels":[[0.2]]}"#);
    let out = run(&[
        "analyze", "--schedule", &sched, "--angles-a", "0.1,0.2,0.3", "--angles-b", "0,0,0",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["resource"]["n"], 2);
}

#[test]
fn densecode_all_messages_n2() {
    let out = run(&["densecode", "--n", "2", "--random-schedule", "--all", "--seed", "11"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 16);
    for row in rows {
        assert_eq!(row["message"], row["decoded"]);
    }
    assert!(String::from_utf8_lossy(&out.stderr).contains("bits_per_message=4"));
}

#[test]
fn densecode_csv_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dc.csv");
    let out = run(&[
        "densecode", "--n", "1", "--computational", "--format", "csv", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text, "message_bits,decoded_bits,ok\n00,00,true\n01,01,true\n10,10,true\n11,11,true\n");
}

#[test]
fn decode_of_non_codeword_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "s.json", r#"{"num_qubits": 2, "amps": [[1,0],[0,0],[0,0],[0,0]]}"#);
    let out = run(&["densecode", "--n", "1", "--computational", "--decode", &state]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("undecodable"));
}

#[test]
fn decode_of_codeword() {
    let dir = tempfile::tempdir().unwrap();
    // Z on A of the computational Bell pair: (|00> - |11>)/sqrt 2.
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let state = write(
        dir.path(),
        "s.json",
        &format!(r#"{{"num_qubits": 2, "amps": [[{h},0],[0,0],[0,0],[-{h},0]]}}"#),
    );
    let out = run(&["densecode", "--n", "1", "--computational", "--decode", &state]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["bits"], "11");
    assert_eq!(v["labels"], serde_json::json!([3]));
}

#[test]
fn analyze_cluster6_reports_purity() {
    let out = run(&["analyze", "--n", "3", "--cluster6", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let purity = v["resource"]["purity_last_pair"].as_f64().unwrap();
    assert!((purity - 0.375).abs() < 1e-12);
    assert_eq!(v["resource"]["witness"]["verdict"], "NOT_BELL_PRODUCT");
    assert!(v["cluster6"]["identity_order"]["fidelity"].is_number());
}

#[test]
fn analyze_computational_is_inconclusive() {
    let out = run(&["analyze", "--n", "2", "--computational"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["resource"]["purity_last_pair"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["resource"]["witness"]["verdict"], "INCONCLUSIVE");
}

#[test]
fn analyze_search_and_closed_form() {
    let out = run(&[
        "analyze", "--search-cluster-n2", "--grid", "pi/4", "--closed-form", "--random-schedules", "10",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!(v["cluster_n2_search"]["report"]["fidelity"].as_f64().unwrap() > 1.0 - 1e-6);
    assert!(v["closed_form"]["max_deviation"].as_f64().unwrap() < 1e-12);
    assert_eq!(v["closed_form"]["not_bell_product"], 10);
}

#[test]
fn reports_are_byte_identical() {
    let args = ["teleport", "--n", "2", "--random-schedule", "--random-state", "--seed", "42", "--trials", "3"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let other = run(&["teleport", "--n", "2", "--random-schedule", "--seed", "43", "--trials", "3"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["teleport"],
        vec!["teleport", "--n", "1"],
        vec!["teleport", "--n", "1", "--computational", "--random-schedule"],
        vec!["teleport", "--n", "1", "--computational", "--state", "/no/such/file.json"],
        vec!["teleport", "--n", "2", "--cluster6"],
        vec!["analyze"],
        vec!["analyze", "--search-cluster-n2", "--grid", "tau"],
        vec!["verify", "--only", "nonsense"],
        vec!["frobnicate"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn malformed_schedule_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let sched = write(dir.path(), "s.json", r#"{"n":3,"levels":[[0.1],[0.2,0.3]]}"#);
    let out = run(&["teleport", "--schedule", &sched]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn qubit_cap_from_environment() {
    let out = bin()
        .args(["teleport", "--n", "3", "--computational"])
        .env("TELECLUSTER_QUBIT_CAP", "8")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
    let out = run(&["densecode", "--n", "13", "--computational"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_subset_passes() {
    let out = run(&["verify", "--only", "transfer", "--only", "bell", "--n-max", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["criteria"].as_array().unwrap().len(), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("PASS [3] transfer"));
    assert!(stderr.contains("PASS [7] bell"));
}

#[test]
fn verify_cluster6_check_reports_failure() {
    let out = run(&["verify", "--only", "cluster6"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["passed"], false);
    let detail = &v["criteria"][0]["detail"];
    assert!((detail["fidelity_to_reference"].as_f64().unwrap() - 0.5625).abs() < 1e-12);
    assert!(detail["angle_dependence"].as_f64().unwrap() < 1e-12);
}
