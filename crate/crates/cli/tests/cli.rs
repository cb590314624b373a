use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rh_core::builtin::example_gprime;
use rh_core::io::symbol_to_json;
use rh_core::matrix::SymbolMatrix;
use rh_core::reduce::unit_from_angle;
use rh_core::scalar::Rational;
use serde_json::Value;

fn rh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rh")).args(args).env_remove("RH_TOLERANCE").output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn builtin_pipeline() {
    let out = rh(&["pipeline", "@paper-example-gprime"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["reduction"]["orders"], serde_json::json!([0, 2, 2, 0]));
    assert_eq!(v["reduction"]["blocks"], serde_json::json!([[1, 0], [2, 2], [1, 0]]));
    assert_eq!(v["report"]["partial_indices"], serde_json::json!([0, 1, 1, 4]));
    assert_eq!(v["report"]["maslov"], 6);
    assert_eq!(v["report"]["onto"], true);
    assert_eq!(v["report"]["kernel_dim"], 6);
    assert_eq!(v["oracle"]["study"]["dimension"], 6);
    assert_eq!(v["verdict"], "PASS");
    assert_eq!(v["settings"]["tolerance"], 1e-8);
    assert_eq!(v["settings"]["truncation"], 32);
}

#[test]
fn reports_are_deterministic() {
    let a = rh(&["pipeline", "@paper-example-gprime", "--seed", "7"]);
    let b = rh(&["pipeline", "@paper-example-gprime", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn analyze_builtin_and_identity() {
    let v = json(&rh(&["analyze", "@paper-example"]));
    assert_eq!(v["report"]["partial_indices"], serde_json::json!([0, 1, 1, 4]));
    assert_eq!(v["report"]["kernel_dim"], 6);
    let id = scratch("identity.json", &symbol_to_json(&SymbolMatrix::<Rational>::identity(3)));
    let out = rh(&["analyze", path(&id)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"]["maslov"], 0);
    assert_eq!(v["report"]["kernel_dim"], 3);
    // degenerate pipeline matches analyze
    let p = json(&rh(&["pipeline", path(&id)]));
    assert_eq!(p["report"]["partial_indices"], v["report"]["partial_indices"]);
    assert_eq!(p["verdict"], "PASS");
}

#[test]
fn singular_symbols() {
    let gp = scratch("gprime.json", &symbol_to_json(&example_gprime::<Rational>()));
    assert_eq!(rh(&["analyze", path(&gp)]).status.code(), Some(3));
    let v = json(&rh(&["analyze", path(&gp), "--reduce"]));
    assert_eq!(v["report"]["kernel_dim"], 6);
    assert_eq!(v["reduction"]["profile"], "1:0,2:2,1:0");
    // singular at ζ = i
    let i = unit_from_angle::<Rational>(std::f64::consts::FRAC_PI_2);
    let rot = scratch("rotated.json", &symbol_to_json(&example_gprime::<Rational>().rotate(&i.conj())));
    assert_eq!(rh(&["reduce", path(&rot)]).status.code(), Some(3));
    let out = rh(&["reduce", path(&rot), "--rotate", "1.5707963267948966"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["reduction"]["orders"], serde_json::json!([0, 2, 2, 0]));
}

#[test]
fn parse_errors() {
    let bad = scratch("bad.json", "{\"n\": 1,\n \"entries\": [[{\"terms\": [}]]}");
    let out = rh(&["analyze", path(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2 column"));
    assert_eq!(rh(&["analyze", "@no-such-example"]).status.code(), Some(1));
    assert_eq!(rh(&["analyze", "@example", "--profile", "1:0,1:2"]).status.code(), Some(4));
    assert_eq!(rh(&["analyze", "@example", "--profile", "x"]).status.code(), Some(1));
    assert_eq!(rh(&["scalar", "--l", "1"]).status.code(), Some(1));
}

#[test]
fn tolerance_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_rh"))
        .args(["analyze", "@example"])
        .env("RH_TOLERANCE", "1e-9")
        .output()
        .unwrap();
    assert_eq!(json(&out)["settings"]["tolerance"], 1e-9);
}

const SCALAR_RHS: &str = r#"{"m": 1, "kind": "laurent", "terms": [{"k": -1, "re": "-1", "im": "0"}, {"k": 0, "re": "1", "im": "0"}]}"#;

#[test]
fn spectral_solve() {
    let one = scratch("one.json", &symbol_to_json(&SymbolMatrix::<Rational>::identity(1)));
    let rhs = scratch("rhs.json", SCALAR_RHS);
    let out = rh(&["solve", path(&one), "--rhs", path(&rhs), "--profile", "1:1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!(v["residual"].as_f64().unwrap() < 1e-10);
    let terms = v["solution"][0].as_array().unwrap();
    assert_eq!(terms.len(), 2);
    assert!((terms[0]["re"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!((terms[1]["re"].as_f64().unwrap() + 1.0).abs() < 1e-10);
}

#[test]
fn scalar_commands() {
    let v = json(&rh(&["scalar", "--l", "3", "--m", "1", "--sign", "-"]));
    assert_eq!(v["kernel_dim"], 3);
    assert_eq!(v["agree"], true);
    assert_eq!(v["basis_verified"], true);
    assert_eq!(json(&rh(&["scalar", "--l", "-2", "--m", "0"]))["kernel_dim"], 0);
    let rhs = scratch("srhs.json", SCALAR_RHS);
    let out = rh(&["solve-scalar", "--r", "0", path(&rhs)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(v["solution"]["kind"], "laurent");
    let out = rh(&["solve-scalar", "--r", "-1", path(&rhs)]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["onto"], false);
}

#[test]
fn kernel_command() {
    let v = json(&rh(&["kernel", "@example-gtilde"]));
    assert_eq!(v["dimension"], 6);
    assert_eq!(v["formula"]["kernel_dim"], 6);
    assert_eq!(v["basis"].as_array().unwrap().len(), 6);
    assert!(v["basis_residuals"].as_array().unwrap().iter().all(|r| r.as_f64().unwrap() < 1e-8));
}

#[test]
fn batch_mode() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-batch");
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("a.json"), symbol_to_json(&SymbolMatrix::<Rational>::identity(2))).unwrap();
    std::fs::write(dir.join("b.json"), symbol_to_json(&SymbolMatrix::<Rational>::monomial_diagonal(&[1, 2]))).unwrap();
    std::fs::write(dir.join("c.json"), "not json").unwrap();
    let out = rh(&["analyze", "--batch", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["a.json"]["report"]["kernel_dim"], 2);
    assert_eq!(v["b.json"]["report"]["maslov"], 6);
    assert_eq!(v["c.json"]["exit_code"], 1);
}

#[test]
fn text_and_selftest() {
    let out = rh(&["pipeline", "@paper-example-gprime", "--format", "text"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("κ2 = 1, κ3 = 1"));
    assert!(text.contains("κ4 = 4"));
    assert!(text.contains("verdict: PASS"));
    let out = rh(&["selftest", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["all_pass"], true);
}
