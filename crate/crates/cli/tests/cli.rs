use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;
use trustwatch_core::fixtures::{DELIVERY_EXPLICIT_SCENARIO, DELIVERY_SCENARIO};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trustwatch"))
}

fn scenario_file(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

struct Fixture {
    _dir: tempfile::TempDir,
    delivery: String,
    dir: PathBuf,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario_file(dir.path(), "delivery.toml", DELIVERY_SCENARIO);
    Fixture { delivery: path.to_str().unwrap().to_string(), dir: dir.path().to_path_buf(), _dir: dir }
}

#[test]
fn analyze_text_shows_matrices() {
    let f = fixture();
    let out = run(&["analyze", "--scenario", &f.delivery]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for cell in ["(-13.54, -0.885)", "(-23.54, -1.835)", "(-26.54, -9.50)", "(-13.54, -20.00)", "(-17.80, -0.95)"] {
        assert!(text.contains(cell), "missing {cell}\n{text}");
    }
}

#[test]
fn analyze_machine_is_reproducible() {
    let f = fixture();
    let args = ["analyze", "--scenario", &f.delivery, "--format", "machine"];
    let (a, b) = (run(&args), run(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let doc = json(&a);
    assert_eq!(doc["nash"]["existence_probability"], 0.5);
}

#[test]
fn expected_boundary_source() {
    let f = fixture();
    let out = run(&["analyze", "--scenario", &f.delivery, "--format", "machine", "--boundary-source", "expected"]);
    let b = &json(&out)["boundary"];
    let k = 5.0 / b["a"].as_f64().unwrap();
    assert!((b["b"].as_f64().unwrap() * k + 1.5).abs() < 1e-9);
    assert!((b["c"].as_f64().unwrap() * k + 0.74).abs() < 1e-9);
}

#[test]
fn malformed_scenario_exits_2_without_output() {
    let f = fixture();
    let bad = scenario_file(&f.dir, "bad.toml", "robustness = \"high\"\n");
    let out = run(&["analyze", "--scenario", bad.to_str().unwrap(), "--format", "machine"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());

    let broken = scenario_file(&f.dir, "broken.toml", &DELIVERY_EXPLICIT_SCENARIO.replace("violation_cost = 20.0", "violation_cost = 1.0"));
    let out = run(&["optimize", "--scenario", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_file_exits_1() {
    let out = run(&["analyze", "--scenario", "/nonexistent/scenario.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn optimize_with_margin() {
    let f = fixture();
    let out = run(&["optimize", "--scenario", &f.delivery, "--format", "machine"]);
    let opt = &json(&out)["optimum"];
    assert!((opt["strategy"]["no_observe"].as_f64().unwrap() - 0.574).abs() < 1e-6);
    assert!((opt["human_expected_utility"].as_f64().unwrap() + 0.4047).abs() < 1e-4);

    let out = run(&["optimize", "--scenario", &f.delivery, "--format", "machine", "--epsilon", "0.1"]);
    let q = &json(&out)["optimum"]["strategy"];
    let (qn, qe) = (q["no_observe"].as_f64().unwrap(), q["observe_execution"].as_f64().unwrap());
    assert!((qn - 0.564).abs() < 1e-9);
    assert!(10.0 * qn - 3.0 * qe <= 5.64 + 1e-9);
}

#[test]
fn empty_region_exits_3() {
    let f = fixture();
    let weak = scenario_file(&f.dir, "weak.toml", &DELIVERY_EXPLICIT_SCENARIO.replace("goal_penalty = 20.0", "goal_penalty = 5.0"));
    let out = run(&["optimize", "--scenario", weak.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no deterring strategy"));
    let out = run(&["analyze", "--scenario", weak.to_str().unwrap(), "--format", "machine"]);
    assert!(out.status.success());
    assert!(json(&out)["optimum"].is_null());
}

#[test]
fn simulate_safe_row() {
    let f = fixture();
    let out = run(&["simulate", "--scenario", &f.delivery, "--seed", "7", "--trials", "5", "--strategy", "1,0,0"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines.iter().all(|l| l.contains("payoff=-0.95") && l.contains("robot=safe")));
}

#[test]
fn simulate_export_is_byte_identical() {
    let f = fixture();
    let first = f.dir.join("first.json");
    let args = |out: &Path| {
        vec![
            "simulate".to_string(),
            "--scenario".into(),
            f.delivery.clone(),
            "--seed".into(),
            "99".into(),
            "--strategy".into(),
            "0.2,0.3,0.5".into(),
            "--strategy".into(),
            "0,0,1".into(),
            "--strategy".into(),
            "0.426,0,0.574".into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };
    assert!(bin().args(args(&first)).output().unwrap().status.success());
    let export: Value = serde_json::from_slice(&std::fs::read(&first).unwrap()).unwrap();

    // rebuild the command line from the export alone
    let second = f.dir.join("second.json");
    let mut cmd = bin();
    cmd.args(["simulate", "--scenario", &f.delivery, "--seed", &export["seed"].to_string()]);
    for t in export["trials"].as_array().unwrap() {
        let q = &t["committed_strategy"];
        cmd.arg("--strategy").arg(format!("{},{},{}", q["observe_plan"], q["observe_execution"], q["no_observe"]));
    }
    cmd.arg("--out").arg(&second);
    assert!(cmd.output().unwrap().status.success());
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
}

#[test]
fn simulate_rejections() {
    let f = fixture();
    let out = run(&["simulate", "--scenario", &f.delivery, "--trials", "0", "--strategy", "1,0,0"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["simulate", "--scenario", &f.delivery, "--strategy", "1,0,0", "--strategy", "0.5,0.6,0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("trial 2"));

    let out = run(&["simulate", "--scenario", &f.delivery, "--strategy", "1,x,0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trial 1"));
}

#[test]
fn simulate_merged_and_interactive() {
    let f = fixture();
    let out = run(&["simulate", "--scenario", &f.delivery, "--merged", "--strategy", "0.5,0.5", "--format", "machine"]);
    assert!(out.status.success());
    let doc = json(&out);
    assert_eq!(doc["config"]["merged_monitoring"], true);
    assert_eq!(doc["trials"][0]["committed_strategy"]["observe_plan"], 0.5);

    let mut child = bin()
        .args(["simulate", "--scenario", &f.delivery, "--interactive", "--trials", "2", "--format", "machine"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"1,0,0\nnot a strategy\n0,0,1\n").unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let doc: Value = serde_json::from_str(&text[text.find('{').unwrap()..]).unwrap();
    assert_eq!(doc["trials"].as_array().unwrap().len(), 2);
    assert_eq!(doc["trials"][1]["robot_choice"], "probably_risky");
}

#[test]
fn region_data_samples() {
    let f = fixture();
    let out = run(&["region-data", "--scenario", &f.delivery, "--resolution", "2", "--format", "machine"]);
    let plot = json(&out);
    let line = plot["line"].as_array().unwrap();
    assert_eq!(line.len(), 2);
    for p in line {
        let (qn, qe) = (p[0].as_f64().unwrap(), p[1].as_f64().unwrap());
        assert!((qe - (10.0 * qn - 5.74) / 3.0).abs() < 1e-9);
    }
    assert!((line[0][0].as_f64().unwrap() - 0.574).abs() < 1e-12);
    assert!((line[1][0].as_f64().unwrap() - 0.874).abs() < 1e-12);
    let labels: Vec<_> = plot["references"].as_array().unwrap().iter().map(|r| r["label"].clone()).collect();
    assert_eq!(labels, ["Explicable plans", "Legible plans"]);

    let out = run(&["region-data", "--scenario", &f.delivery, "--format", "machine"]);
    let line = json(&out)["line"].as_array().unwrap().clone();
    assert_eq!(line.len(), 100);
    assert!(line.windows(2).all(|w| w[0][0].as_f64() <= w[1][0].as_f64()));
}
