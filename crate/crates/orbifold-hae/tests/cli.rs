//! The binary: exit codes, output formats, cache behaviour.

use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_orbifold-hae"));
    c.env_remove("ORBIFOLD_HAE_CACHE");
    c
}

fn run(args: &[&str]) -> (i32, String) {
    let o = bin().args(args).output().unwrap();
    (o.status.code().unwrap(), String::from_utf8(o.stdout).unwrap())
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["verify-identities", "--order", "30"]).0, 0);
    assert_eq!(run(&["no-such-command"]).0, 2);
    assert_eq!(run(&["potential", "--genus", "1", "--order", "3"]).0, 2);
    assert_eq!(run(&["verify-all", "--max-k", "2"]).0, 2);
    assert_eq!(run(&["intersection", "--genus", "0", "--exps", "1"]).0, 2);
    assert_eq!(run(&["verify-hae", "--genus", "1"]).0, 2);
}

#[test]
fn intersection_output() {
    assert_eq!(run(&["intersection", "--genus", "2", "--exps", "4"]).1.trim(), "1/1152");
    let (code, out) = run(&["intersection", "--genus", "1", "--exps", "1", "--emit", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["value"], "1/24");
}

#[test]
fn graphs_json() {
    let (code, out) = run(&["graphs", "--genus", "2"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 7);
    let (_, out) = run(&["graphs", "--genus", "1", "--legs", "1", "--decorated"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v.as_array().unwrap().iter().all(|d| d["decoration"].is_array()));
}

#[test]
fn potential_json_schema() {
    let (code, out) =
        run(&["potential", "--genus", "1", "--insertions", "1", "--order", "15", "--max-k", "2", "--emit", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    for k in ["genus", "insertions", "ring_element", "series", "checks"] {
        assert!(v.get(k).is_some(), "missing {k}");
    }
    let coeff = &v["ring_element"][0]["coeff"];
    assert_eq!(coeff.as_array().unwrap().len(), 4);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["residual_zero"] == true));
}

#[test]
fn cached_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = ["rmatrix", "--max-k", "4", "--order", "20", "--emit", "json", "--cache-dir", d];
    let (c1, a) = run(&args);
    assert!(std::fs::read_dir(dir.path()).unwrap().count() > 0);
    let (c2, b) = run(&args);
    let (_, c) = run(&args[..args.len() - 2]);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn cache_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .env("ORBIFOLD_HAE_CACHE", dir.path())
        .args(["intersection", "--genus", "1", "--exps", "1"])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(std::fs::read_dir(dir.path()).unwrap().any(|e| {
        e.unwrap().file_name().to_string_lossy().starts_with("psi-")
    }));
}

#[test]
fn poisoned_constant_fails_rmatrix() {
    let (code, out) = run(&["rmatrix", "--max-k", "3", "--order", "20", "--poison-constant"]);
    assert_eq!(code, 1);
    assert!(out.contains("FAIL symplectic condition level 2"));
}
