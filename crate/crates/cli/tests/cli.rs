//! End-to-end runs of the `emergentq` binary.

use std::path::Path;
use std::process::{Command, Output};

use emergentq::catalog::{builtin, save_spec};
use emergentq::phasespace::PhaseSpace;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emergentq"))
        .args(args)
        .env_remove("EMERGENTQ_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn check<'a>(report: &'a Value, id: &str) -> &'a Value {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["id"] == id)
        .unwrap_or_else(|| panic!("no check {id}"))
}

fn write_builtin(dir: &Path, name: &str) -> String {
    let path = dir.join(format!("{name}.json"));
    save_spec(&builtin(name).unwrap(), &path).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn verify_all_builtin_passes_with_three_reports() {
    let out = run(&["verify", "--all-builtin"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let set = json(&out);
    assert_eq!(set["overall"], "pass");
    let reports = set["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 3);
    for r in reports {
        assert_eq!(r["overall"], "pass", "{}", r["system"]);
        assert!(r["checks"].as_array().unwrap().iter().all(|c| c.get("runtime_ms").is_none()));
    }
    let again = run(&["verify", "--all-builtin"]);
    assert_eq!(out.stdout, again.stdout, "reports are reproducible");
}

#[test]
fn reduce_spec_file_reports_kstar() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_builtin(dir.path(), "pendulum-free");
    let out = run(&["reduce", &path]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    let kstar = check(&report, "reduce.kstar");
    assert_eq!(kstar["lhs"], "a1*Pbar^2");
    let space = PhaseSpace::from_pairs(vec![("Qbar".into(), "Pbar".into())], &["a1"]).unwrap();
    assert_eq!(space.parse(kstar["lhs"].as_str().unwrap()).unwrap(), space.parse("a1*Pbar^2").unwrap());
    assert_eq!(check(&report, "reduce.symplectic")["status"], "pass");
}

#[test]
fn non_conserved_charge_fails_analysis() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = builtin("pendulum-free").unwrap();
    spec.charges[0].expr = "x^2".into();
    let path = dir.path().join("broken.json");
    save_spec(&spec, &path).unwrap();
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    assert_eq!(report["overall"], "fail");
    let c = check(&report, "analyze.charge[0].conserved");
    assert_eq!(c["status"], "fail");
    assert_eq!(c["residual"], "-2*x*y");
    assert!(String::from_utf8_lossy(&out.stderr).contains("analyze.charge[0].conserved"));
}

#[test]
fn usage_and_io_errors_exit_two() {
    assert_eq!(run(&["analyze", "/nonexistent/spec.json"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["verify"]).status.code(), Some(2));
}

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let out = run(&[
        "simulate", "pendulum-free", "--t1", "0", "--t2", "1", "--dt", "0.01", "--q0", "1,0", "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("t,q_1,q_2,qb_1,qb_2,detK,divint"));
    assert_eq!(text.lines().count(), 102);
    assert_eq!(check(&json(&out), "simulate.conservation.C1")["status"], "pass");
}

#[test]
fn spectrum_exports_levels() {
    let out = run(&["spectrum", "pendulum-oscillator", "--L", "10", "--n", "2000", "--levels", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let levels = v["spectrum"]["eigenvalues"].as_array().unwrap();
    assert_eq!(levels.len(), 5);
    assert_eq!(v["spectrum"]["grid"]["L"], 10.0);
    for (k, e) in levels.iter().enumerate() {
        assert!((e.as_f64().unwrap() - (k as f64 + 0.5)).abs() < 1e-3);
    }
}

#[test]
fn seed_flag_and_environment_agree() {
    let flag = run(&["brst", "roessler-duffing", "--slices", "3", "--trials", "3", "--seed", "11"]);
    let env = Command::new(env!("CARGO_BIN_EXE_emergentq"))
        .args(["brst", "roessler-duffing", "--slices", "3", "--trials", "3"])
        .env("EMERGENTQ_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(flag.status.code(), Some(0));
    assert_eq!(flag.stdout, env.stdout);
}

#[test]
fn timings_are_opt_in() {
    let out = run(&["--timings", "analyze", "pendulum-free"]);
    let report = json(&out);
    assert!(report["checks"][0]["runtime_ms"].is_number());
}
