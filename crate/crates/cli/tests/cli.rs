use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn gapcert(args: &[&str]) -> Output {
    gapcert_env(args, &[])
}

fn gapcert_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gapcert"));
    cmd.args(args).env_remove("GAPCERT_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn certify_exit_codes() {
    let pm = config("pm-q2.json");
    let ok = gapcert(&[
        "certify",
        "--map",
        pm.to_str().unwrap(),
        "--seminorm-bound",
        "0.001",
    ]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    let report = json(&ok);
    assert_eq!(report["result"]["certificate"]["status"], "certified");
    assert!(
        report["result"]["certificate"]["certified_delta"]
            .as_f64()
            .unwrap()
            > 0.0
    );

    let tent = config("tent.json");
    let no = gapcert(&[
        "certify",
        "--map",
        tent.to_str().unwrap(),
        "--space",
        "bvp:1",
        "--seminorm-bound",
        "0.01",
    ]);
    assert_eq!(no.status.code(), Some(2));
    assert_eq!(
        json(&no)["result"]["certificate"]["status"],
        "not-certified"
    );

    let missing = gapcert(&[
        "certify",
        "--map",
        "no/such/map.json",
        "--seminorm-bound",
        "0.001",
    ]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).contains("no/such/map.json"));
}

#[test]
fn malformed_configs_report_the_location() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = dir.path().join("unknown.json");
    std::fs::write(
        &unknown,
        "{\n  \"family\": \"doubling\",\n  \"colour\": 3\n}\n",
    )
    .unwrap();
    let out = gapcert(&[
        "certify",
        "--map",
        unknown.to_str().unwrap(),
        "--seminorm-bound",
        "0.001",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    assert!(msg.contains("colour") && msg.contains("line 3"), "{msg}");

    let broken = dir.path().join("broken.json");
    std::fs::write(
        &broken,
        "{\n  \"family\": \"pomeau-manneville\",\n  \"parameters\": { \"q\": }\n}\n",
    )
    .unwrap();
    let out = gapcert(&[
        "certify",
        "--map",
        broken.to_str().unwrap(),
        "--seminorm-bound",
        "0.001",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    let no_q = dir.path().join("no_q.json");
    std::fs::write(&no_q, "{ \"family\": \"pomeau-manneville\" }").unwrap();
    let out = gapcert(&[
        "certify",
        "--map",
        no_q.to_str().unwrap(),
        "--seminorm-bound",
        "0.001",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("parameters.q"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_with_one() {
    let pm = config("pm-q1.json");
    let pm = pm.to_str().unwrap();
    assert_eq!(
        gapcert(&["certify", "--map", pm, "--bogus"]).status.code(),
        Some(1)
    );
    assert_eq!(gapcert(&["certify", "--map", pm]).status.code(), Some(1));
    assert_eq!(
        gapcert(&[
            "certify",
            "--map",
            pm,
            "--seminorm-bound",
            "0.001",
            "--grid",
            "2"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        gapcert(&[
            "certify",
            "--map",
            pm,
            "--seminorm-bound",
            "0.001",
            "--tol-disc",
            "-1"
        ])
        .status
        .code(),
        Some(1)
    );
    let logistic = config("logistic.json");
    let out = gapcert(&[
        "certify",
        "--map",
        logistic.to_str().unwrap(),
        "--seminorm-bound",
        "0.001",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("usage error"));
}

#[test]
fn reports_are_byte_identical_and_carry_provenance() {
    let pm = config("pm-q1.json");
    let args = [
        "check-ly",
        "--map",
        pm.to_str().unwrap(),
        "--samples",
        "20",
        "--grid",
        "128",
        "--seed",
        "9",
    ];
    let a = gapcert(&args);
    let b = gapcert_env(&args, &[("GAPCERT_THREADS", "1")]);
    let c = gapcert_env(&args, &[("GAPCERT_THREADS", "4")]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let report = json(&a);
    assert_eq!(report["seed"], 9);
    assert_eq!(report["tolerances"]["eps_eig"], 1e-10);
    assert_eq!(report["tolerances"]["tol_disc"], 0.02);
    assert!(report["version"]
        .as_str()
        .unwrap()
        .starts_with(env!("CARGO_PKG_VERSION")));

    let bad = gapcert_env(&args, &[("GAPCERT_THREADS", "0")]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn declared_theta_is_checked_against_sampling() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("pm.json");
    std::fs::write(
        &cfg,
        r#"{ "family": "pomeau-manneville", "parameters": { "q": 1 }, "alpha": 1, "theta": 0.5 }"#,
    )
    .unwrap();
    let out = gapcert(&[
        "certify",
        "--map",
        cfg.to_str().unwrap(),
        "--seminorm-bound",
        "0.0001",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("declared θ"), "{}", stderr(&out));
}

#[test]
fn potentials_from_inline_specs_and_files() {
    let pm = config("pm-q1.json");
    let pm = pm.to_str().unwrap();
    let out = gapcert(&["certify", "--map", pm, "--potential", "linear:0.001"]);
    assert_eq!(out.status.code(), Some(0));
    let s = json(&out)["result"]["grid_seminorm"].as_f64().unwrap();
    assert!((s - 0.001).abs() < 1e-12);

    let warned = gapcert(&[
        "certify",
        "--map",
        pm,
        "--potential",
        "linear:0.002",
        "--seminorm-bound",
        "0.0014",
    ]);
    assert_eq!(warned.status.code(), Some(0));
    assert!(stderr(&warned).contains("exceeds the declared bound"));
    assert_eq!(json(&warned)["warnings"].as_array().unwrap().len(), 1);

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("phi.csv");
    std::fs::write(&file, "x,phi\n0,0\n0.5,0.0005\n1,0.001\n").unwrap();
    let out = gapcert(&[
        "certify",
        "--map",
        pm,
        "--potential",
        file.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!((json(&out)["result"]["grid_seminorm"].as_f64().unwrap() - 0.001).abs() < 1e-12);
}

#[test]
fn spectrum_of_the_doubling_map() {
    let d = config("doubling-interval.json");
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("a.bin");
    let out = gapcert(&[
        "spectrum",
        "--map",
        d.to_str().unwrap(),
        "--grid",
        "256",
        "--matrix-out",
        matrix.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = &json(&out)["result"];
    assert!((r["lambda"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((r["subdominant"].as_f64().unwrap() - 0.5).abs() < 0.01);
    assert_eq!(std::fs::metadata(&matrix).unwrap().len(), 8 + 256 * 256 * 8);

    let csv = gapcert(&[
        "spectrum",
        "--map",
        d.to_str().unwrap(),
        "--grid",
        "64",
        "--format",
        "csv",
    ]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("x,h,nu,mu\n"));
    assert_eq!(text.lines().count(), 65);
}

#[test]
fn correlations_of_cosines_vanish() {
    let d = config("doubling-interval.json");
    let out = gapcert(&[
        "correlations",
        "--map",
        d.to_str().unwrap(),
        "--f",
        "cos:1",
        "--g",
        "cos:1",
        "--n-max",
        "5",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<(usize, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (n, c) = l.split_once(',').unwrap();
            (n.parse().unwrap(), c.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 6);
    assert!(rows[1].1.abs() <= 0.02);
}

#[test]
fn checks_report_pass_and_fail_codes() {
    let tent = config("tent.json");
    let out = gapcert(&[
        "check-ly",
        "--map",
        tent.to_str().unwrap(),
        "--space",
        "bvp:1",
        "--samples",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["result"]["max_ratio"].as_f64().unwrap() <= 0.5 + 0.02);

    let pm = config("pm-q1.json");
    let out = gapcert(&[
        "check-transport",
        "--map",
        pm.to_str().unwrap(),
        "--trials",
        "50",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["result"]["max_ratio"].as_f64().unwrap() <= 0.75 + 1e-9);

    let circle = config("doubling-circle.json");
    let out = gapcert(&[
        "check-ly",
        "--map",
        circle.to_str().unwrap(),
        "--space",
        "bvp:1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reproduce_constants_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("constants.csv");
    let out = gapcert(&[
        "reproduce-constants",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().skip(1).collect();
    assert!(lines.len() >= 7);
    assert!(lines.iter().all(|l| l.ends_with(",true")), "{text}");
    assert!(text.contains("Lipschitz threshold,0.00148643"));
    assert!(text.contains("total variation threshold,0.00690852"));
    let summary = stderr(&out);
    assert!(summary.lines().all(|l| l.starts_with("PASS")), "{summary}");
}
