use std::path::PathBuf;
use std::process::Command;

use deacp::cli::run;
use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn call(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("deacp").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let (code, out, err) = call(&all);
    assert!(err.is_empty(), "{err}");
    (code, serde_json::from_str(&out).unwrap())
}

#[test]
fn bisim_exit_codes() {
    let f = fixture("basics.deacp");
    assert_eq!(call(&["bisim", &f, "--left", "P1", "--right", "P2"]).0, 0);
    assert_eq!(call(&["bisim", &f, "--left", "Q1", "--right", "Q2"]).0, 1);
    assert_eq!(call(&["ab-bisim", &f, "--left", "P1", "--right", "P2"]).0, 0);
    assert_eq!(call(&["ab-bisim", &f, "--left", "Q1", "--right", "Q2"]).0, 1);
}

#[test]
fn inline_terms_are_accepted() {
    let f = fixture("basics.deacp");
    assert_eq!(call(&["bisim", &f, "--left", "a . (b + b)", "--right", "a . b"]).0, 0);
}

#[test]
fn usage_and_input_errors_exit_2() {
    assert_eq!(call(&["frobnicate"]).0, 2);
    assert_eq!(call(&["lts", "/nonexistent.deacp", "--process", "P"]).0, 2);
    let f = fixture("basics.deacp");
    let (code, _, err) = call(&["lts", &f, "--process", "a . "]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error:"));
}

#[test]
fn help_exits_0() {
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("dnii"));
}

#[test]
fn lts_json_lists_the_division_chain() {
    let (code, v) = json(&["lts", &fixture("division.deacp"), "--process", "P"]);
    assert_eq!(code, 0);
    let actions: Vec<&str> = v["transitions"].as_array().unwrap().iter().map(|t| t["action"].as_str().unwrap()).collect();
    assert_eq!(actions, ["q := 0", "r := 11", "q := 1", "r := 8", "q := 2", "r := 5", "q := 3", "r := 2"]);
    assert_eq!(v["terminating"].as_array().unwrap().len(), 1);
}

#[test]
fn conditional_lts_json() {
    let (code, v) = json(&["lts", &fixture("leak.deacp"), "--process", "P", "--conditional"]);
    assert_eq!(code, 0);
    assert_eq!(v["transitions"].as_array().unwrap().len(), 2);
}

#[test]
fn json_output_is_deterministic() {
    let f = fixture("cluster.deacp");
    let args = ["prove", f.as_str(), "--left", "P", "--right", "Q", "--json"];
    assert_eq!(call(&args).1, call(&args).1);
    let args = ["conjecture", "--pairs", "20", "--seed", "7", "--json"];
    assert_eq!(call(&args).1, call(&args).1);
}

#[test]
fn dnii_verdicts() {
    let (code, v) = json(&["dnii", &fixture("leak.deacp"), "--process", "P"]);
    assert_eq!(code, 1);
    assert_eq!(v["result"]["verdict"], "fails");
    let (x, y) = (v["result"]["sigma"]["h"].as_i64().unwrap(), v["result"]["sigma_prime"]["h"].as_i64().unwrap());
    assert_ne!(x == 0, y == 0);
    let (code, out, _) = call(&["dnii", &fixture("leak.deacp"), "--process", "P"]);
    assert_eq!(code, 1);
    assert!(out.contains("sigma  = {h="));
    let (code, v) = json(&["dnii", &fixture("lowcopy.deacp"), "--process", "P"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["verdict"], "holds");
}

#[test]
fn prove_and_refute() {
    let (code, v) = json(&["prove", &fixture("subtraction.deacp"), "--left", "P", "--right", "Q"]);
    assert_eq!(code, 0);
    assert_eq!(v["replay"]["oracle"], 0);
    let (code, v) = json(&["prove", &fixture("basics.deacp"), "--left", "Q1", "--right", "Q2"]);
    assert_eq!(code, 1);
    assert_eq!(v["proved"], false);
}

#[test]
fn linearize_and_cfar() {
    let f = fixture("cluster.deacp");
    let (code, v) = json(&["linearize", &f, "--process", "P"]);
    assert_eq!(code, 0);
    assert!(v["replay"]["cfar"].as_u64().unwrap() >= 1);
    let (code, v) = json(&["cfar", &f, "--spec", "E", "--var", "X", "--hide", "a"]);
    assert_eq!(code, 0);
    assert_eq!(v["rule"], "CFAR");
    assert_eq!(call(&["cfar", &f, "--spec", "E", "--var", "W", "--hide", "a"]).0, 2);
}

#[test]
fn domain_override() {
    let (code, v) = json(&["parse", &fixture("basics.deacp"), "--lo", "-2", "--hi", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["domain"], serde_json::json!([-2, 1]));
}

#[test]
fn state_bound_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_deacp"))
        .args(["lts", &fixture("division.deacp"), "--process", "P"])
        .env("DEACP_STATE_BOUND", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exploration limit"));
    let out = Command::new(env!("CARGO_BIN_EXE_deacp"))
        .args(["lts", &fixture("division.deacp"), "--process", "P"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn parse_output_is_a_fixed_point() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    for name in ["basics.deacp", "cluster.deacp", "division.deacp", "leak.deacp", "lowcopy.deacp"] {
        let (code, first, _) = call(&["parse", &fixture(name)]);
        assert_eq!(code, 0);
        let copy = dir.join(name);
        std::fs::write(&copy, &first).unwrap();
        let (code, second, err) = call(&["parse", copy.to_str().unwrap()]);
        assert_eq!(code, 0, "{name}: {err}");
        assert_eq!(first, second, "{name}");
    }
}
