use serde_json::Value;
use std::process::{Command, Output};

fn unsteer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unsteer")).args(args).output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = unsteer(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn state_report() {
    let v = json(&["state", "--c", "0.5,0.5,0"]);
    assert_eq!(v["command"], "state");
    assert_eq!(v["timing"], Value::Null);
    assert_eq!(v["results"]["strength_2"].as_f64().unwrap(), 0.5);
    let eff = v["results"]["efficiency_2"].as_f64().unwrap();
    assert!((eff - 0.676776695296637).abs() < 1e-12);
}

#[test]
fn validation_errors_exit_with_two() {
    let out = unsteer(&["state", "--c", "0.9,0.9,0.9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("λ11"));
    assert_eq!(unsteer(&["state", "--c", "a,b"]).status.code(), Some(2));
    assert_eq!(unsteer(&["certify", "--c", "0,0,0", "--n", "4"]).status.code(), Some(2));
    assert_eq!(unsteer(&["sweep", "--step", "0.5"]).status.code(), Some(2));
    assert_eq!(unsteer(&["bogus"]).status.code(), Some(2));
}

#[test]
fn bb84_verdicts() {
    assert_eq!(json(&["bb84", "--v", "0.5"])["results"]["verdict"], "SUPERUNSTEERABLE");
    assert_eq!(json(&["bb84", "--v", "0.9"])["results"]["verdict"], "WITNESSED_STEERABLE");
    let grid = json(&["bb84", "--step", "0.25"]);
    assert_eq!(grid["results"].as_array().unwrap().len(), 5);
}

#[test]
fn box_file_round_trip() {
    let dir = std::env::temp_dir().join(format!("unsteer-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let state = dir.join("state.json");
    std::fs::write(&state, r#"{"c": [0.6, 0.3, 0]}"#).unwrap();
    let from_state = json(&["box", "--state", state.to_str().unwrap()]);
    let table = serde_json::json!({"n": 2, "p": from_state["results"]["p"]});
    let box_path = dir.join("box.json");
    std::fs::write(&box_path, table.to_string()).unwrap();
    let cert = json(&["certify", "--box", box_path.to_str().unwrap()]);
    assert_eq!(cert["results"]["verdict"], "SUPERUNSTEERABLE");
    assert_eq!(cert["results"]["d_A"], 2);
    assert!(!cert["results"]["trace"].as_array().unwrap().is_empty());

    let out = dir.join("sweep.csv");
    let status = unsteer(&["sweep", "--step", "0.1", "--out", out.to_str().unwrap()]);
    assert!(status.status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("c1,c2,c3,separable,strength_2,efficiency_2,discord\n"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn text_summary_uses_four_digits() {
    let out = unsteer(&["state", "--c", "0.5,0.5,0", "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("efficiency_2: 0.6768"));
}

#[test]
fn timing_is_opt_in() {
    let v = json(&["rac", "--c", "0.5,0.5,0", "--n", "2", "--restarts", "2", "--timing"]);
    assert!(v["timing"]["seconds"].as_f64().unwrap() >= 0.0);
    let r = &v["results"]["2"];
    assert!(r["exceeds_classical"].as_bool().unwrap());
    assert!(r["simulated"]["deviation"].as_f64().unwrap() < 1e-12);
}
