use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const TOL: f64 = 1e-9;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gowers-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Structural equality with numbers compared to `tol` (relative above 1).
fn assert_close(actual: &Value, expected: &Value, path: &str) {
    match (actual, expected) {
        (Value::Number(a), Value::Number(e)) => {
            let (a, e) = (a.as_f64().unwrap(), e.as_f64().unwrap());
            assert!((a - e).abs() <= TOL * e.abs().max(1.0), "{path}: {a} vs {e}");
        }
        (Value::Array(a), Value::Array(e)) => {
            assert_eq!(a.len(), e.len(), "{path}: length");
            for (i, (x, y)) in a.iter().zip(e).enumerate() {
                assert_close(x, y, &format!("{path}[{i}]"));
            }
        }
        (Value::Object(a), Value::Object(e)) => {
            let keys = |m: &serde_json::Map<String, Value>| m.keys().filter(|k| *k != "version").cloned().collect::<Vec<_>>();
            assert_eq!(keys(a), keys(e), "{path}: keys");
            for k in keys(e) {
                assert_close(&a[&k], &e[&k], &format!("{path}.{k}"));
            }
        }
        _ => assert_eq!(actual, expected, "{path}"),
    }
}

#[test]
fn constant_function_has_unit_norm() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "one.json", r#"{"n": 7, "re": [1, 1, 1, 1, 1, 1, 1]}"#);
    let report = json_stdout(&run(&["gowers", "norm", "--input", f.to_str().unwrap(), "--order", "2"]));
    assert!((report["value"].as_f64().unwrap() - 1.0).abs() <= TOL);
    assert_eq!(report["command"], "gowers norm");
    assert_eq!(report["config_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let input = golden("decompose_n53_input.json");
    let args = ["--seed", "7", "structure", "decompose", "--input", input.to_str().unwrap(), "--k", "3", "--delta", "0.3"];
    let first = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, run(&args).stdout);
    let threaded = bin().args(args).env("GOWERS_LAB_THREADS", "1").output().unwrap();
    assert_eq!(first.stdout, threaded.stdout);
}

#[test]
fn decomposition_matches_golden_output() {
    let input = golden("decompose_n53_input.json");
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let args = ["structure", "decompose", "--input", input.to_str().unwrap(), "--k", "3", "--delta", "0.3"];
    let report = json_stdout(&bin().args(args).args(["--trace", trace.to_str().unwrap()]).output().unwrap());
    assert_eq!(report["audit"]["all_hold"], true);
    let expected: Value = serde_json::from_str(&std::fs::read_to_string(golden("decompose_n53_k3.json")).unwrap()).unwrap();
    assert_close(&report, &expected, "$");

    let trace = std::fs::read_to_string(trace).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("step,which_loop,energy_B,energy_Bprime,complexity_B,complexity_Bprime,gowers_fU"));
    assert_eq!(lines.count(), report["iterations"].as_u64().unwrap() as usize);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["vdw", "number", "--k", "3"]).status.code(), Some(2));
    let bad_threads = bin().args(["vdw", "bound", "--k", "2", "--m", "2"]).env("GOWERS_LAB_THREADS", "zero").output().unwrap();
    assert_eq!(bad_threads.status.code(), Some(2));
}

#[test]
fn domain_errors_exit_with_one_and_report_json() {
    let dir = tempfile::tempdir().unwrap();
    // Z_8 is not of prime order.
    let f = write(dir.path(), "eight.json", r#"{"n": 8, "set": [1, 2]}"#);
    let out = run(&["gowers", "norm", "--input", f.to_str().unwrap(), "--order", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"]["kind"].is_string() && err["error"]["message"].is_string());

    let missing = run(&["gowers", "norm", "--input", "/nonexistent/f.json", "--order", "2"]);
    assert_eq!(missing.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&missing.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "input");

    let out = run(&["--tol", "0", "vdw", "bound", "--k", "2", "--m", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn vdw_commands() {
    let number = json_stdout(&run(&["vdw", "number", "--k", "3", "--m", "2"]));
    assert_eq!(number["value"], 9);
    assert_eq!(number["avoider"]["n"], 8);

    let bound = json_stdout(&run(&["vdw", "bound", "--k", "2", "--m", "3"]));
    assert_eq!(bound["value"], "512");
    assert_eq!(bound["overflow"], false);

    let dir = tempfile::tempdir().unwrap();
    let c = write(dir.path(), "c.json", r#"{"n": 9, "m": 2, "colours": [1, 1, 2, 2, 1, 1, 2, 2, 1]}"#);
    let check = json_stdout(&run(&["vdw", "check", "--colouring", c.to_str().unwrap(), "--k", "3"]));
    assert_eq!(check["found"], true);
    assert_eq!((check["a"].as_u64(), check["r"].as_u64()), (Some(1), Some(4)));
    let check = json_stdout(&run(&["vdw", "check", "--colouring", c.to_str().unwrap(), "--k", "4"]));
    assert_eq!(check["found"], false);
}

#[test]
fn empirical_c_csv_has_a_header_row_per_modulus() {
    let out = run(&["--format", "csv", "recur", "empirical-c", "--n", "5,7", "--k", "3", "--delta", "0.5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,k,delta,c_min,witness_set");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("5,3,"));
}
