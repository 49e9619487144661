use serde_json::Value;
use std::io::Write;
use std::process::{Command, Output};

fn bts(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bts"))
        .args(args)
        .env("BTS_THREADS", "2")
        .output()
        .expect("bts runs")
}

fn temp_file(name: &str, text: &str) -> std::path::PathBuf {
    let path = std::env::temp_dir().join(format!("bts-cli-{}-{name}", std::process::id()));
    std::fs::File::create(&path).unwrap().write_all(text.as_bytes()).unwrap();
    path
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout))
    })
}

const DIAGONAL: &str = r#"{"d": 3, "entries": {"000": "3", "111": 2}}"#;

#[test]
fn svals_on_a_diagonal_tensor() {
    let path = temp_file("diag.json", DIAGONAL);
    let out = bts(&["svals", "--input", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let data = v["spectrum"]["data"].as_array().unwrap();
    assert_eq!(data.len(), 6);
    assert_eq!(v["spectrum"]["ed_degree"], 6);
    assert!((v["best_rank_one"]["sigma"].as_f64().unwrap() - 3.0).abs() < 1e-12);
}

#[test]
fn symmetric_partition_from_the_command_line() {
    let out = bts(&["svals", "--mu", "3", "--seed", "7"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["spectrum"]["data"].as_array().unwrap().len(), 3);
}

#[test]
fn malformed_json_exits_with_parse_code() {
    let path = temp_file("bad.json", "{\"d\": 3,\n");
    let out = bts(&["svals", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
    let out = bts(&["invariants", "--mu", "2,x"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invariants_are_exact_strings() {
    let path = temp_file("inv.json", DIAGONAL);
    let out = bts(&["invariants", "--input", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["det"], "36");
}

#[test]
fn degrees_table_lists_every_partition() {
    let out = bts(&["degrees", "--d", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for mu in ["(3)", "(2,1)", "(1,1,1)"] {
        assert!(text.contains(&format!("mu = {mu}")), "{text}");
    }
    assert!(!text.contains("FAIL"));
    let out = bts(&["degrees", "--d", "4", "--format", "json"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["tables"].as_array().unwrap().len(), 5);
    assert_eq!(v["ones_identity_ok"], true);
}

#[test]
fn verify_product_exit_codes() {
    let out = bts(&["verify-product", "--mu", "1,1,1", "--trials", "5", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["failed"], 0);
    assert_eq!(bts(&["verify-product", "--trials", "2"]).status.code(), Some(2));
    // No computation meets a zero tolerance.
    let out = bts(&["verify-product", "--mu", "2,1", "--trials", "2", "--tol", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn random_check_passes() {
    let out = bts(&["random-check", "--trials", "10", "--mu", "2,1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn edpoly_reports_both_polynomials() {
    let out = bts(&["edpoly", "--mu", "1,1,1", "--seed", "5"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["dual"].as_array().unwrap().len(), 7);
    assert_eq!(v["primal"].as_array().unwrap().len(), 7);
    assert_eq!(v["primal_root_residuals"].as_array().unwrap().len(), 6);
}

#[test]
fn in_process_runner_matches_the_binary() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = bts_core::cli::run(["bts", "degrees", "--d", "2"], &mut out, &mut err);
    assert_eq!(code, 0);
    assert_eq!(out, bts(&["degrees", "--d", "2"]).stdout);
    let code = bts_core::cli::run(["bts", "no-such-command"], &mut out, &mut err);
    assert_eq!(code, 2);
}
