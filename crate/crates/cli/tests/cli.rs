use std::process::{Command, Output};

use serde_json::Value;

fn pam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pam"))
        .args(args)
        .env_remove("PAM_THREADS")
        .output()
        .unwrap()
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn third_moment_without_noise() {
    let r = json_of(&pam(&[
        "moment3", "--nu", "1", "--lambda", "0", "--t", "1", "--x", "0",
    ]));
    let v = r["results"][0]["value"].as_f64().unwrap();
    let want = (2.0 * std::f64::consts::PI).powf(-1.5);
    assert!((v - want).abs() <= 1e-12 * want);
    assert_eq!(r["results"][0]["route"], "one_dimensional_integral");
}

#[test]
fn validate_reports_all_routes() {
    let r = json_of(&pam(&[
        "validate", "--nu", "1", "--lambda", "1", "--t", "1", "--x", "0",
    ]));
    let row = &r["results"][0];
    for key in [
        "one_dimensional_integral",
        "triple_integral",
        "contour_k3",
        "bound_lower",
        "bound_upper",
    ] {
        assert!(row[key].is_f64(), "missing {key}");
    }
    assert_eq!(row["within_tolerance"], true);
    assert_eq!(r["summary"]["passed"], true);
}

#[test]
fn front_reports_lambda_p() {
    let r = json_of(&pam(&[
        "front", "--nu", "1", "--lambda", "1", "--t", "10,20,40",
    ]));
    let lp = r["summary"]["lambda_p"].as_f64().unwrap();
    assert!((lp - 0.8165).abs() < 0.02, "{lp}");
    assert_eq!(r["results"].as_array().unwrap().len(), 151);
}

#[test]
fn config_file_round_trips_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(
        &path,
        r#"{"command": "moment2", "params": {"nu": 0.7, "lambda": 1.1, "t": 0.30000000000000004},
            "points": [-0.3333333333333333, 1e-300], "second_points": [0.1, 2.5]}"#,
    )
    .unwrap();
    let first = json_of(&pam(&["--config", path.to_str().unwrap()]));
    assert_eq!(
        first["inputs"]["params"]["t"].as_f64().unwrap().to_bits(),
        (0.1f64 + 0.2).to_bits()
    );
    assert_eq!(first["inputs"]["points"][1].as_f64().unwrap(), 1e-300);

    std::fs::write(&path, serde_json::to_string(&first["inputs"]).unwrap()).unwrap();
    let second = json_of(&pam(&["--config", path.to_str().unwrap()]));
    assert_eq!(first, second);
}

#[test]
fn csv_and_log_scale_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = pam(&[
        "moment3",
        "--t",
        "800",
        "--x",
        "-1,1",
        "--log-scale",
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("x,log_value,sign_value,"));
    let log_v: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!(log_v > 790.0 && log_v < 800.0, "{log_v}");
    // the plain value overflows and is refused rather than printed as infinity
    assert_eq!(code(&pam(&["moment3", "--t", "800"])), 3);
}

#[test]
fn oracle_two_point() {
    let r = json_of(&pam(&["oracle", "--x", "-0.3,0.4"]));
    let v = r["results"][0]["value"].as_f64().unwrap();
    assert!((v - 0.289_146_987_052_053_2).abs() < 1e-8);
    assert_eq!(r["results"][0]["route"], "contour_k2");
}

#[test]
fn simulate_with_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("cone.bin");
    let r = json_of(&pam(&[
        "simulate",
        "--lambda",
        "0.5",
        "--t",
        "0.05",
        "--nx",
        "101",
        "--replicas",
        "50",
        "--order",
        "1",
        "--snapshot",
        snap.to_str().unwrap(),
        "--snapshot-format",
        "binary",
        "--time-every",
        "50",
    ]));
    assert_eq!(r["results"][0]["replicas"], 50);
    let bytes = std::fs::read(&snap).unwrap();
    assert_eq!(&bytes[..4], b"PAMS");
    let nt = r["summary"]["snapshot_nt"].as_u64().unwrap() as usize;
    assert_eq!(bytes.len(), 16 + 8 * nt * 101);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&pam(&["moment3", "--x", "zero"])), 2);
    assert_eq!(code(&pam(&[])), 2);
    assert_eq!(code(&pam(&["moment3", "--nu", "-1"])), 3);
    assert_eq!(code(&pam(&["oracle", "--x", "0.4,-0.3"])), 3);
    assert_eq!(code(&pam(&["three-point", "--x", "0,1"])), 3);
    assert_eq!(code(&pam(&["moment3", "--max-evals", "120"])), 4);
    // a truncated contour converges to the wrong value
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"command": "validate", "contour": {"half_height": 2.0, "rel_tol": 1e-3}}"#,
    )
    .unwrap();
    let out = pam(&["--config", path.to_str().unwrap()]);
    assert_eq!(code(&out), 5);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["summary"]["passed"], false);
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["exit_code"], 5);
}

#[test]
fn thread_count_from_environment() {
    let ok = Command::new(env!("CARGO_BIN_EXE_pam"))
        .args(["oracle", "--x", "0,0"])
        .env("PAM_THREADS", "1")
        .output()
        .unwrap();
    assert!(ok.status.success());
    let bad = Command::new(env!("CARGO_BIN_EXE_pam"))
        .args(["moment3"])
        .env("PAM_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}
