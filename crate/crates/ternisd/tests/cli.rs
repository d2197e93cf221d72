use std::process::Command;

use serde_json::Value;
use ternisd::cli::{EXIT_INFEASIBLE, EXIT_NO_SOLUTION, EXIT_OK, EXIT_USAGE};
use ternisd::format;

fn ternisd(args: &[&str]) -> (i32, String, String) {
    ternisd_env(args, None)
}

fn ternisd_env(args: &[&str], seed: Option<&str>) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ternisd"));
    cmd.args(args).env_remove("TERNISD_SEED");
    if let Some(s) = seed {
        cmd.env("TERNISD_SEED", s);
    }
    let out = cmd.output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap_or_else(|e| panic!("{e}: {s}"))
}

#[test]
fn generate_solve_and_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.sd3");
    let p = path.to_str().unwrap();
    let (code, _, err) = ternisd(&["gen", "--n", "20", "--k", "10", "--w", "18", "--seed", "4", "--out", p]);
    assert_eq!(code, EXIT_OK, "{err}");
    let text = std::fs::read_to_string(&path).unwrap();
    let format::Instance::Sd(inst) = format::parse(&text).unwrap() else { panic!("expected sd3") };
    assert_eq!(format::serialize(&format::Instance::Sd(inst.clone())), text);

    for engine in ["prange", "wagner", "rep"] {
        let (code, out, err) = ternisd(&["solve", "--in", p, "--engine", engine, "--max-restarts", "5000"]);
        assert_eq!(code, EXIT_OK, "{engine}: {err}");
        let v = json(&out);
        assert_eq!(v["status"], "solved");
        assert_eq!(v["verified"], true);
        let trits: Vec<u8> = v["solution"].as_str().unwrap().bytes().map(|b| b - b'0').collect();
        let e = ternisd_core::TritVector::from_trits(&trits).unwrap();
        assert!(inst.is_solution(&e), "{engine}");
    }
}

#[test]
fn doom_index_is_one_based() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.doom3");
    let p = path.to_str().unwrap();
    let (code, _, err) = ternisd(&["gen-doom", "--n", "18", "--k", "9", "--w", "16", "--z", "4", "--seed", "2", "--out", p]);
    assert_eq!(code, EXIT_OK, "{err}");
    let text = std::fs::read_to_string(&path).unwrap();
    let format::Instance::Doom(inst) = format::parse(&text).unwrap() else { panic!("expected doom3") };
    let (code, out, err) = ternisd(&["solve", "--in", p, "--max-restarts", "5000"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let v = json(&out);
    let idx = v["syndrome_index"].as_u64().unwrap() as usize;
    assert!((1..=4).contains(&idx));
    let trits: Vec<u8> = v["solution"].as_str().unwrap().bytes().map(|b| b - b'0').collect();
    let e = ternisd_core::TritVector::from_trits(&trits).unwrap();
    assert_eq!(inst.h.mul_vec(&e).unwrap(), inst.syndromes[idx - 1]);
}

#[test]
fn exhausted_restarts_report_no_solution() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.sd3");
    let p = path.to_str().unwrap();
    ternisd(&["gen", "--n", "40", "--k", "20", "--w", "38", "--out", p]);
    let (code, out, _) = ternisd(&["solve", "--in", p, "--engine", "prange", "--max-restarts", "1"]);
    assert_eq!(code, EXIT_NO_SOLUTION);
    assert_eq!(json(&out)["status"], "no-solution");
}

#[test]
fn malformed_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.sd3");
    std::fs::write(&path, "sd3 4 2 3\n0120\n0003\n01\n").unwrap();
    let (code, _, err) = ternisd(&["solve", "--in", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    assert!(!err.is_empty());
    assert_eq!(ternisd(&["estimate", "--R", "abc", "--W", "1", "--alg", "wagner"]).0, EXIT_USAGE);
    assert_eq!(ternisd(&["no-such-command"]).0, EXIT_USAGE);
    assert_eq!(ternisd_env(&["gen", "--n", "10", "--k", "5", "--w", "8"], Some("x")).0, EXIT_USAGE);
}

#[test]
fn infeasible_estimate_exits_three() {
    let (code, _, _) = ternisd(&["estimate", "--R", "0.5", "--W", "0.3", "--alg", "wagner"]);
    assert!(code == EXIT_INFEASIBLE || code == EXIT_USAGE, "{code}");
    let (code, _, _) = ternisd(&["estimate", "--R", "0.8", "--W", "0.7", "--alg", "wagner"]);
    assert_eq!(code, EXIT_INFEASIBLE);
}

#[test]
fn seed_falls_back_to_the_environment() {
    let args = ["gen", "--n", "12", "--k", "6", "--w", "10"];
    let (_, env7, _) = ternisd_env(&args, Some("7"));
    let (_, flag7, _) = ternisd(&[&args[..], &["--seed", "7"]].concat());
    let (_, none, _) = ternisd(&args);
    let (_, flag0, _) = ternisd(&[&args[..], &["--seed", "0"]].concat());
    assert_eq!(env7, flag7);
    assert_eq!(none, flag0);
    assert_ne!(env7, none);
}

#[test]
fn estimate_reports_table_values() {
    let (code, out, _) = ternisd(&["estimate", "--R", "0.369", "--W", "1", "--alg", "wagner"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert!((v["exponent"].as_f64().unwrap() - 0.2695).abs() < 1e-3);
    assert_eq!(v["algorithm"], "wagner");
    assert!(v["R"].is_number() && v["W"].is_number());
}

#[test]
fn curve_is_csv_with_a_header() {
    let (code, out, _) = ternisd(&["curve", "--R", "0.5", "--alg", "prange", "--steps", "5"]);
    assert_eq!(code, EXIT_OK);
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    let headers: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert!(headers.contains(&"W".to_string()) && headers.contains(&"exponent".to_string()));
    assert_eq!(rdr.records().count(), 5);
}

#[test]
fn formats_agree() {
    let base = ["rep-count", "--alpha0", "0.4", "--beta0", "0.1", "--alpha1", "0.3", "--beta1", "0.15"];
    let (code, out, _) = ternisd(&base);
    assert_eq!(code, EXIT_OK);
    let z = json(&out)["z"].as_f64().unwrap();
    assert!((z - 0.081439).abs() < 1e-5);
    let (code, text, _) = ternisd(&[&base[..], &["--format", "text"]].concat());
    assert_eq!(code, EXIT_OK);
    assert!(text.contains("0.0814"));
}
