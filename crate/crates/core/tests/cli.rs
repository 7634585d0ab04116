use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn mdl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdl")).args(args).output().expect("mdl runs")
}

fn schema_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(format!("{name}.schema.json"))
}

fn assert_valid(name: &str, doc: &Value) {
    let text = std::fs::read_to_string(schema_path(name)).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{name} output violates schema: {errors:?}\n{doc}");
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

#[test]
fn verify_suites_match_schema() {
    for suite in ["msasep", "open", "braided", "algebra", "appendix"] {
        let out = mdl(&["verify", suite]);
        assert_eq!(out.status.code(), Some(0), "{suite}: {}", String::from_utf8_lossy(&out.stderr));
        let doc = stdout_json(&out);
        assert_valid("verify", &doc);
        assert_eq!(doc["result"]["pass"], true);
    }
}

#[test]
fn verify_accepts_overrides() {
    let out = mdl(&["verify", "open", "--L", "2", "--q", "2/3", "--Q", "1/5"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_valid("verify", &doc);
    assert_eq!(doc["config"]["L"], 2);
    assert_eq!(doc["config"]["q"], "2/3");
}

#[test]
fn rates_sources_agree() {
    let mut tables = Vec::new();
    for source in ["closed", "fusion", "aux"] {
        let out = mdl(&["rates", "--m", "3", "--k1", "2", "--k2", "1", "--q", "1/2", "--source", source]);
        assert_eq!(out.status.code(), Some(0), "{source}");
        let doc = stdout_json(&out);
        assert_valid("rates", &doc);
        tables.push(doc["result"].clone());
    }
    let strip = |v: &Value| {
        let mut v = v.clone();
        v.as_object_mut().unwrap().remove("source");
        v
    };
    assert_eq!(strip(&tables[0]), strip(&tables[1]));
    assert_eq!(strip(&tables[0]), strip(&tables[2]));
}

#[test]
fn duality_values() {
    let out = mdl(&["duality", "--model", "open", "--eta", "-1 -1 1 1", "--xi", "1 -1 0 1", "--q", "1/2", "--Q", "1/3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    assert_valid("duality", &doc);

    let out = mdl(&["duality", "--model", "braided", "--m", "2", "--eta", "2,1", "--xi", "1,1", "--q", "1/2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_valid("duality", &stdout_json(&out));
}

#[test]
fn simulate_matches_schema() {
    let out = mdl(&[
        "simulate", "--model", "braided", "--m", "2", "--x", "2,1", "--y", "1,1", "--n", "2000", "--seed", "7",
        "--exact-order", "40",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    assert_valid("simulate", &doc);
    let again = stdout_json(&mdl(&[
        "simulate", "--model", "braided", "--m", "2", "--x", "2,1", "--y", "1,1", "--n", "2000", "--seed", "7",
        "--exact-order", "40",
    ]));
    for key in ["side1", "side2", "exact", "z"] {
        assert_eq!(doc["result"][key], again["result"][key], "{key} differs between identical seeds");
    }
}

#[test]
fn report_reads_verify_output() {
    let dir = std::env::temp_dir().join(format!("mdl-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("verify.json");
    let out = mdl(&["verify", "braided", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let out = mdl(&["report", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    assert_valid("report", &doc);
    assert_eq!(doc["result"]["failed"], 0);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(mdl(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(mdl(&["rates", "--m", "2"]).status.code(), Some(2));
    assert_eq!(mdl(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn invalid_parameters_are_reported() {
    let out = mdl(&["verify", "open", "--q", "3/2"]);
    assert_ne!(out.status.code(), Some(0));
    assert!(!out.stderr.is_empty());
}
