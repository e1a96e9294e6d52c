mod common;

use std::process::Command;

use serde_json::Value;

fn vopt(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_vopt")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn file(name: &str) -> String {
    common::corpus_dir().join(name).to_string_lossy().into_owned()
}

#[test]
fn check_e1_reports_half_half() {
    let (code, out, _) = vopt(&["check", &file("e1.vopt"), "--point", "0"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["first_order"]["pair"]["lambda"], serde_json::json!([0.5]));
    assert_eq!(v["first_order"]["pair"]["mu"], serde_json::json!([0.5]));
    assert!(v["meta"]["wall_time_ms"].is_number());
    assert_eq!(v["tool"]["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn bad_point_is_a_usage_error() {
    let (code, out, err) = vopt(&["check", &file("e1.vopt"), "--point", "notanumber"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("--point"));
}

#[test]
fn unknown_flags_and_subcommands_are_errors() {
    assert_eq!(vopt(&["check", &file("e1.vopt"), "--point", "0", "--verbose"]).0, 1);
    assert_eq!(vopt(&["solve"]).0, 1);
    assert_eq!(vopt(&[]).0, 1);
}

#[test]
fn scan_saddle_finds_dominator() {
    let (code, out, _) = vopt(&["scan", &file("saddle.vopt"), "--point", "0", "--radius", "0.6"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["oracle"]["result"]["minimal"], false);
    let d = v["oracle"]["result"]["dominator"][0].as_f64().unwrap();
    assert!(d.abs() > 0.0 && d.abs() <= 0.6);
}

#[test]
fn infeasible_point_still_exits_zero() {
    let (code, out, _) = vopt(&["check2", &file("e1.vopt"), "--point", "-1"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["feasible"], false);
}

#[test]
fn every_subcommand_is_deterministic_without_meta() {
    let e2 = file("e2.vopt");
    let runs: [&[&str]; 7] = [
        &["check", &e2, "--point", "0.5,0.5"],
        &["check2", &e2, "--point", "0.5,0.5", "--seed", "4"],
        &[
            "sufficiency",
            &e2,
            "--point",
            "0.5,0.5",
            "--pairs",
            "300",
            "--seed",
            "4",
        ],
        &["isolated", &e2, "--point", "0.5,0.5", "--samples", "300", "--seed", "4"],
        &["scan", &e2, "--point", "0.5,0.5", "--random", "500", "--seed", "4"],
        &[
            "deriv",
            &e2,
            "--point",
            "0.5,0.5",
            "--function",
            "g1",
            "--direction",
            "1,-2",
            "--kind",
            "hadamard",
        ],
        &["polar", &e2, "--which", "C"],
    ];
    for args in runs {
        let mut a: Vec<&str> = args.to_vec();
        a.push("--no-meta");
        let first = vopt(&a);
        assert_eq!(first.0, 0, "{a:?}: {}", first.2);
        assert_eq!(first, vopt(&a), "{a:?}");
        let v: Value = serde_json::from_str(&first.1).unwrap();
        assert!(v["meta"].is_null());
    }
}

#[test]
fn help_documents_every_flag() {
    let (code, out, _) = vopt(&["check2", "--help"]);
    assert_eq!(code, 0);
    for flag in [
        "--point",
        "--seed",
        "--format",
        "--no-meta",
        "--tol-membership",
        "--tol-strict",
        "--directions",
    ] {
        assert!(out.contains(flag), "{flag} missing from help");
    }
}

#[test]
fn text_format_is_a_table() {
    let (code, out, _) = vopt(&[
        "check",
        &file("e1.vopt"),
        "--point",
        "0",
        "--format",
        "text",
        "--no-meta",
    ]);
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l.starts_with("first_order.pair.lambda")));
}

#[test]
fn tolerance_overrides_are_reported() {
    let (code, out, _) = vopt(&[
        "check",
        &file("e1.vopt"),
        "--point",
        "0",
        "--tol-strict",
        "1e-6",
        "--no-meta",
    ]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["tolerances"]["strict"], 1e-6);
    assert_eq!(
        vopt(&["check", &file("e1.vopt"), "--point", "0", "--tol-strict", "-1"]).0,
        1
    );
}

#[test]
fn gap_and_derivative_values() {
    let (_, out, _) = vopt(&[
        "deriv",
        &file("e1.vopt"),
        "--point",
        "0",
        "--kind",
        "gap",
        "--at",
        "1",
        "--no-meta",
    ]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!((v["derivative"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let (_, out, _) = vopt(&[
        "deriv",
        &file("e6.vopt"),
        "--point",
        "0",
        "--kind",
        "hadamard2",
        "--direction",
        "1",
        "--no-meta",
    ]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!((v["derivative"]["value"].as_f64().unwrap() - 2.0).abs() < 1e-2);
}

#[test]
fn nonsmooth_kink_is_a_numerical_failure() {
    let dir = std::env::temp_dir().join(format!("vopt-cli-it-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("abs.vopt");
    std::fs::write(
        &path,
        "vars x\nobjective [abs(x)]\nconstraint [-1]\nconeC orthant(1)\nconeK orthant(1)\n",
    )
    .unwrap();
    let (code, _, err) = vopt(&["check", path.to_str().unwrap(), "--point", "0"]);
    assert_eq!(code, 2, "{err}");
    let (code, out, _) = vopt(&[
        "isolated",
        path.to_str().unwrap(),
        "--point",
        "0",
        "--order",
        "1",
        "--lambda",
        "1",
        "--mu",
        "0",
        "--no-meta",
    ]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["isolated"]["first_order"]["certified"], true);
}
