use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("orthochain").chain(args.iter().copied());
    let code = orthochain_cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn envelope_shape() {
    let v = json(&["evaluate", "--coeffs", "0.5,0.5", "--no-timestamp"]);
    assert_eq!(v["schema"], "v1");
    assert_eq!(v["command"], "evaluate");
    assert!(v.get("timestamp").is_none());
    assert_eq!(v["config"]["coeffs_source"], "0.5,0.5");
    assert!(v["result"]["functionals"]["strong_value"].as_f64().unwrap() > 0.0);
    let v = json(&["build", "--coeffs", "power:1:8"]);
    assert!(v["timestamp"].as_u64().is_some());
}

#[test]
fn point_mass_reports_infinite_strong() {
    let v = json(&[
        "evaluate",
        "--coeffs",
        "1",
        "--measure",
        "point:0",
        "--no-timestamp",
    ]);
    assert!(v["result"]["functionals"]["strong_value"].is_null());
    assert_eq!(v["result"]["functionals"]["infinite"], true);
}

#[test]
fn csv_output() {
    let (code, out, _) = run(&["classify", "--coeffs", "0.5,0.5,0.5", "--format", "csv"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("k,full_sum,filtered_sum,good_count"));
    assert_eq!(lines.next(), Some("1,2,2,4"));
    let (code, _, err) = run(&[
        "simulate", "--coeffs", "0.5", "--seed", "1", "--format", "csv",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("csv"));
}

#[test]
fn input_errors_exit_with_two() {
    for args in [
        &["evaluate", "--coeffs", ""][..],
        &["evaluate", "--coeffs", "0.5,-1"],
        &["simulate", "--coeffs", "0.5", "--paths", "1000"],
        &[
            "simulate", "--coeffs", "0.5", "--paths", "10", "--seed", "1",
        ],
        &["evaluate", "--coeffs", "0.5", "--measure", "point:7"],
        &["frobnicate"],
    ] {
        let (code, _, err) = run(args);
        assert_eq!(code, 2, "{args:?}");
        assert!(!err.is_empty());
    }
}

#[test]
fn config_file_and_overrides() {
    let dir = std::env::temp_dir().join(format!("orthochain-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.json");
    std::fs::write(
        &cfg,
        r#"{"coeffs":{"kind":"power","exponent":1,"count":4},"seed":4,"paths":500}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let v = json(&["simulate", "--config", cfg, "--no-timestamp"]);
    assert_eq!(v["config"]["paths"], 500);
    let v = json(&[
        "simulate",
        "--config",
        cfg,
        "--paths",
        "700",
        "--no-timestamp",
    ]);
    assert_eq!(v["config"]["paths"], 700);
    assert_eq!(v["config"]["seed"], 4);

    std::fs::write(dir.join("bad.json"), r#"{"coeffs":[0.5],"bogus":1}"#).unwrap();
    let (code, _, err) = run(&["build", "--config", dir.join("bad.json").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("bogus"));

    let out = dir.join("out.json");
    let (code, stdout, _) = run(&["build", "--coeffs", "0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["command"], "build");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_reports_checks() {
    let v = json(&[
        "verify",
        "--coeffs",
        "0.5,0.5",
        "--suite",
        "skeleton",
        "--no-timestamp",
    ]);
    assert_eq!(v["pass"], true);
    let (code, _, err) = run(&["verify", "--coeffs", "0.5,0.5", "--suite", "bridge"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_orthochain");
    let ok = Command::new(bin)
        .args(["build", "--coeffs", "0.5,0.5"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = Command::new(bin)
        .args(["build", "--coeffs", "0"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(!bad.stderr.is_empty() && bad.stdout.is_empty());
}
