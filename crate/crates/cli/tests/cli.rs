use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn orbitscope(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbitscope")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn orbit_of_e0_under_the_preset_keeps_unit_norm() {
    let out = orbitscope(&["orbit", "--x", "e0", "--k", "10"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r.split(',').nth(1) == Some("1")));
}

#[test]
fn orbit_with_zero_steps_and_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/orbit.csv");
    let out = orbitscope(&["orbit", "--x", "e0 + 1/2*e3", "--k", "0", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read_to_string(path).unwrap().lines().count(), 2);
}

#[test]
fn malformed_vector_json_is_a_usage_error() {
    let out = orbitscope(&["orbit", "--x", "{\"index_set\": \"Z\", \"entries\": [[0,", "--k", "3"]);
    assert_eq!(code(&out), 2);
    assert_eq!(stdout_json(&out)["status"], "error");
    assert!(!out.stderr.is_empty());
}

#[test]
fn witness_exit_codes() {
    let found = orbitscope(&["witness", "--kind", "j", "--x", "e0", "--y", "3*e2", "--d", "2"]);
    assert_eq!(code(&found), 0);
    let json = stdout_json(&found);
    assert_eq!(json["status"], "found");
    assert_eq!(json["witness"]["triples"].as_array().unwrap().len(), 5);

    let missing = orbitscope(&["witness", "--kind", "coarse", "--x", "e0", "--y", "5*e0", "--d", "0.5"]);
    assert_eq!(code(&missing), 3);
    assert_eq!(stdout_json(&missing)["status"], "not-found");

    let negative = orbitscope(&["witness", "--kind", "j", "--x", "e0", "--y", "e2", "--d", "-1"]);
    assert_eq!(code(&negative), 2);
}

#[test]
fn witness_kinds_in_float_mode() {
    for kind in ["d", "jmix"] {
        let out = orbitscope(&["--mode", "float", "witness", "--kind", kind, "--x", "0", "--y", "e1", "--d", "1/2"]);
        assert_eq!(code(&out), 0, "{kind}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn config_files_reject_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    fs::write(&path, r#"{"seed": 1, "horizn": 5}"#).unwrap();
    let out = orbitscope(&["--config", path.to_str().unwrap(), "orbit", "--x", "e0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn certify_writes_a_reproducible_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let mut bundles = Vec::new();
    for run in ["a", "b"] {
        let target = dir.path().join(run);
        let out = orbitscope(&["certify", "prop15", "prop22", "--seed", "4", "--out", target.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
        bundles.push(read_bundle(&target));
    }
    assert_eq!(bundles[0], bundles[1]);
    let names: Vec<&str> = bundles[0].iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["index.json", "prop15.json", "prop22.json"]);
    assert!(dir.path().join("a/timing.json").exists());
}

fn read_bundle(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "timing.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn certify_failure_and_unknown_names() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"certificates": {"prop32": {"d": "1/2", "sample_count": 10, "forced_count": 2}}}"#).unwrap();
    let out_dir = dir.path().join("bundle");
    let out = orbitscope(&["--config", cfg.to_str().unwrap(), "certify", "prop32", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 5);
    let index: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("index.json")).unwrap()).unwrap();
    assert_eq!(index["verdict"], "FAIL");

    let out = orbitscope(&["certify", "no-such-certificate", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn explore_evidence_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("evidence.json");
    let out = orbitscope(&["explore", "--trials", "0", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["cone_versus_global"].as_array().unwrap().len(), 0);

    let twice: Vec<Vec<u8>> = (0..2).map(|_| orbitscope(&["explore", "--trials", "2", "--seed", "5"]).stdout).collect();
    assert_eq!(twice[0], twice[1]);

    let out = orbitscope(&["explore", "--family", r#"{"kind": "diagonal"}"#, "--trials", "1"]);
    assert_eq!(code(&out), 2);
}
