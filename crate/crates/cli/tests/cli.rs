use std::process::Command;

use clap::Parser;
use freegeo_cli::{run, RunConfig};
use serde_json::Value;

fn config(args: &[&str]) -> RunConfig {
    RunConfig::try_parse_from(std::iter::once("freegeo").chain(args.iter().copied())).unwrap()
}

fn report(args: &[&str]) -> (Value, i32) {
    let out = run(&config(args)).unwrap();
    (serde_json::from_str(&out.report).unwrap(), out.exit_code)
}

fn bin(args: &[&str]) -> (String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_freegeo"))
        .args(args)
        .output()
        .unwrap();
    (
        String::from_utf8(out.stdout).unwrap(),
        out.status.code().unwrap(),
    )
}

#[test]
fn norm_of_two_leaves() {
    let (r, code) = report(&[
        "norm",
        "--gallery",
        "branching_tree",
        "--params",
        "n=3",
        "--element",
        r#"{"masses":[0,1,-1,0]}"#,
    ]);
    assert_eq!(code, 0);
    assert!((r["result"]["value"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert_eq!(r["command"], "norm");
    assert!(r["version"].is_string());
    assert!(r["tolerances"]["lp"].is_number());
    assert!(r["statement"].as_str().unwrap().contains("transport"));
}

#[test]
fn aligned_pair_lacks_g() {
    let (r, code) = report(&[
        "classify-pair",
        "--gallery",
        "three_point_aligned",
        "--pair=-1,1",
    ]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["flags"]["has_g"], false);
    assert_eq!(r["result"]["eta"].as_f64().unwrap(), 0.0);
}

#[test]
fn perturb_on_the_line_is_certified() {
    let (r, code) = report(&[
        "perturb",
        "--gallery",
        "line",
        "--params",
        "n=4",
        "--element",
        r#"{"molecules":[[1,1,0]]}"#,
        "--gamma",
        "1",
        "--epsilon",
        "0.04",
    ]);
    assert_eq!(code, 0);
    assert_eq!(r["status"], "certified");
    let c = &r["result"]["run"]["constants"];
    assert_eq!(c["beta"].as_f64().unwrap(), 1.0);
    assert!((c["bound"].as_f64().unwrap() - 0.44).abs() < 1e-12);
    assert!(r["result"]["run"]["distance"].as_f64().unwrap() <= 0.44);
}

#[test]
fn perturb_with_seeded_g() {
    let (r, code) = report(&[
        "perturb",
        "--gallery",
        "line",
        "--params",
        "n=4",
        "--element",
        r#"{"molecules":[[1,1,0]]}"#,
        "--gamma",
        "1",
        "--epsilon",
        "0.04",
        "--seed",
        "11",
    ]);
    assert_eq!(code, 0, "{r}");
    assert!(r["inputs"]["g_source"]
        .as_str()
        .unwrap()
        .starts_with("slab point"));
}

#[test]
fn overlapping_pairs_are_a_precondition_failure() {
    let (r, code) = report(&[
        "perturb",
        "--gallery",
        "line",
        "--params",
        "n=4",
        "--element",
        r#"{"molecules":[[0.5,1,0],[0.5,2,1]]}"#,
        "--gamma",
        "1",
        "--epsilon",
        "0.04",
    ]);
    assert_eq!(code, 2);
    assert_eq!(r["status"], "precondition_failed");
}

#[test]
fn petr_certificate_report() {
    let (r, code) = report(&[
        "certify-petr",
        "--index",
        "6",
        "--epsilon",
        "0.1",
        "--seed",
        "2",
    ]);
    assert_eq!(code, 0);
    let cert = &r["result"]["certificate"];
    assert!(cert["distance"].as_f64().unwrap() <= 0.4 + 1e-8);
    assert_eq!(cert["n0"], 4);
}

#[test]
fn ssd1_without_property_g_fails_cleanly() {
    let (r, code) = report(&[
        "ssd1",
        "--gallery",
        "three_point_aligned",
        "--pair=-1,1",
        "--epsilon",
        "0.1",
    ]);
    assert_eq!(code, 2);
    assert_eq!(r["status"], "precondition_failed");
}

#[test]
fn trend_and_modulus_csv() {
    let out = run(&config(&[
        "family-trend",
        "--gallery",
        "petr",
        "--index",
        "3",
        "--format",
        "csv",
    ]))
    .unwrap();
    assert_eq!(
        out.report,
        "index,eta,delta_rotund\n1,0.5,1\n2,0.25,0.5\n3,0.125,0.25\n"
    );
    let out = run(&config(&[
        "modulus",
        "--gallery",
        "equilateral",
        "--params",
        "n=4",
        "--element",
        r#"{"molecules":[[1,1,2]]}"#,
        "--eta-grid",
        "0.05,0.1",
        "--samples",
        "4",
        "--seed",
        "9",
        "--format",
        "csv",
    ]))
    .unwrap();
    assert_eq!(out.report.lines().count(), 3);
}

#[test]
fn csv_is_refused_for_nested_reports() {
    let err = run(&config(&[
        "classify-space",
        "--gallery",
        "line",
        "--format",
        "csv",
    ]))
    .unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn exit_codes_from_the_binary() {
    let (_, code) = bin(&[
        "validate",
        "--space",
        r#"{"n":3,"dist":[[0,1,5],[1,0,1],[5,1,0]]}"#,
    ]);
    assert_eq!(code, 2);
    let (_, code) = bin(&[
        "norm",
        "--space",
        "/nonexistent/space.json",
        "--element",
        r#"{"masses":[0]}"#,
    ]);
    assert_eq!(code, 1);
    let (_, code) = bin(&[
        "norm",
        "--space",
        r#"{"n": 2, "dist": [[0, 1], [1, 0]"#,
        "--element",
        "{}",
    ]);
    assert_eq!(code, 1);
    let (_, code) = bin(&[
        "modulus",
        "--gallery",
        "line",
        "--element",
        r#"{"masses":[0,1,0,0]}"#,
        "--eta-grid",
        "0.1",
    ]);
    assert_eq!(code, 2);
    let (_, code) = bin(&["gallery", "--gallery", "line", "--params", "bogus=1"]);
    assert_eq!(code, 2);
    let (_, code) = bin(&["no-such-command"]);
    assert_eq!(code, 2);
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let args = [
        "classify-space",
        "--gallery",
        "equilateral",
        "--params",
        "n=4",
    ];
    let (stdout, _) = bin(&args);
    let mut with_out: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap();
    with_out.extend(["--out", p]);
    let (silent, code) = bin(&with_out);
    assert_eq!(code, 0);
    assert!(silent.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout);
}

#[test]
fn space_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(
        &path,
        r#"{"n":3,"labels":["a","b","c"],"dist":[[0,1,2],[1,0,1.5],[2,1.5,0]]}"#,
    )
    .unwrap();
    let (r, code) = report(&[
        "classify-pair",
        "--space",
        path.to_str().unwrap(),
        "--pair",
        "a,c",
    ]);
    assert_eq!(code, 0);
    assert!((r["result"]["eta"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}
