use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dlx::brute::ExplanationSets;
use dlx::cli::{cmd_verify, sat_enumerator, EnumeratorOutput, RunConfig, EXIT_FAIL, EXIT_OK};
use dlx::dl::{DecisionList, Instance};
use dlx::encode::EncodingKind;
use dlx::error::ExplainError;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn dlx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dlx"))
        .env("DLX_NO_COLOR", "1")
        .args(args)
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn classify_reports_rule_and_mismatches() {
    let o = dlx(&["classify", "--model", path(&data("boolean4.dlx")), "--instances", path(&data("boolean4.csv"))]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "f=1 via R5\nmismatches: 0 of 1\n");

    let o = dlx(&[
        "classify",
        "--model",
        path(&data("two_rule.dlx")),
        "--instances",
        path(&data("two_rule.csv")),
        "--format",
        "json-lines",
    ]);
    assert_eq!(stdout(&o), "{\"instance\":0,\"class\":\"pos\",\"rule\":1}\n");
}

#[test]
fn classify_edge_cases() {
    let o = dlx(&["classify", "--model", path(&data("boolean4.dlx")), "--instances", path(&data("empty.csv"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());

    let o = dlx(&["classify", "--model", path(&data("broken.dlx")), "--instances", path(&data("empty.csv"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let o = dlx(&["classify", "--model", path(&data("missing.dlx"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn explain_enumeration_report() {
    let o = dlx(&[
        "explain",
        "--model",
        path(&data("ternary.dlx")),
        "--instances",
        path(&data("ternary.csv")),
        "--mode",
        "enum-marco-axp",
        "--format",
        "json-lines",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["axps"], serde_json::json!([["x1", "x2"], ["x3"]]));
    assert_eq!(v["cxps"], serde_json::json!([["x1", "x3"], ["x2", "x3"]]));
    assert_eq!(v["num_axps"], 2);
    assert_eq!(v["complete"], true);
    assert!(v.get("time").is_none());

    let o = dlx(&[
        "explain",
        "--model",
        path(&data("ternary.dlx")),
        "--instances",
        path(&data("ternary.csv")),
        "--timings",
        "--format",
        "json-lines",
    ]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert!(v["time"].is_f64());
}

#[test]
fn explain_single_modes() {
    let o = dlx(&[
        "explain",
        "--model",
        path(&data("self_determining.dlx")),
        "--instances",
        path(&data("self_determining.csv")),
        "--mode",
        "horn",
        "--format",
        "json-lines",
    ]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "{\"instance\":0,\"class\":\"pos\",\"kind\":\"axp\",\"features\":[\"a\",\"c\",\"d\"],\"complete\":true}\n"
    );

    let o = dlx(&[
        "explain",
        "--model",
        path(&data("constant.dlx")),
        "--instances",
        path(&data("constant.csv")),
        "--mode",
        "one-cxp",
    ]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "instance 0: class yes CXP no CXp exists\ninstance 1: class yes CXP no CXp exists\n"
    );

    let o = dlx(&[
        "explain",
        "--model",
        path(&data("overlapping.dlx")),
        "--instances",
        path(&data("self_determining.csv")),
        "--mode",
        "horn",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn explain_budget_and_strict() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("big.dlx");
    let insts = dir.path().join("big.csv");
    let o = dlx(&[
        "generate", "--seed", "3", "--features", "30", "--domain", "4", "--rules", "300", "--max-len", "5",
        "--out", path(&model), "--instances-out", path(&insts), "--samples", "3",
    ]);
    assert!(o.status.success());
    let args = ["explain", "--model", path(&model), "--instances", path(&insts), "--budget-s", "0.000000001", "--format", "json-lines"];
    let o = dlx(&args);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"complete\":false"));
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(dlx(&strict).status.code(), Some(3));

    let o = dlx(&["explain", "--model", path(&model), "--budget-s", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn encode_writes_wcnf() {
    let dir = tempfile::tempdir().unwrap();
    let o = dlx(&[
        "encode",
        "--model",
        path(&data("ternary.dlx")),
        "--instances",
        path(&data("ternary.csv")),
        "--out-dir",
        path(dir.path()),
    ]);
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("inst0.wcnf")).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(' ').collect();
    assert_eq!(&header[..2], ["p", "wcnf"]);
    assert_eq!(header[4], "6");
    assert_eq!(text.lines().filter(|l| l.starts_with("1 ")).count(), 5);

    let o = dlx(&[
        "encode",
        "--model",
        path(&data("three_class.dlx")),
        "--instances",
        path(&data("three_class.csv")),
        "--encoding",
        "alternative",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("binary only"));
}

#[test]
fn verify_fixtures_and_random_models() {
    for (m, i) in [
        ("ternary.dlx", "ternary.csv"),
        ("boolean4.dlx", "boolean4.csv"),
        ("two_rule.dlx", "two_rule.csv"),
        ("self_determining.dlx", "self_determining.csv"),
        ("three_class.dlx", "three_class.csv"),
        ("constant.dlx", "constant.csv"),
    ] {
        let o = dlx(&["verify", "--model", path(&data(m)), "--instances", path(&data(i))]);
        assert!(o.status.success(), "{m}: {}", stdout(&o));
    }
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..20u64 {
        let model = dir.path().join(format!("m{seed}.dlx"));
        let s = seed.to_string();
        let o = dlx(&["generate", "--seed", &s, "--features", "6", "--rules", "8", "--classes", "3", "--out", path(&model)]);
        assert!(o.status.success());
        let o = dlx(&["verify", "--model", path(&model), "--seed", &s, "--samples", "5"]);
        assert!(o.status.success(), "seed {seed}: {}", stdout(&o));
    }
}

/// Drops the last CXp of every result.
fn corrupted(dl: &DecisionList, inst: &Instance, kind: EncodingKind) -> Result<EnumeratorOutput, ExplainError> {
    let mut out = sat_enumerator(dl, inst, kind)?;
    for (_, sets) in &mut out {
        let ExplanationSets { cxps, .. } = sets;
        cxps.pop();
    }
    Ok(out)
}

#[test]
fn verify_flags_a_corrupted_enumerator() {
    let mut cfg = RunConfig::new(data("ternary.dlx"));
    cfg.instances = Some(data("ternary.csv"));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    assert_eq!(cmd_verify(&cfg, &mut out, &mut err, &corrupted), EXIT_FAIL);
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("mismatch on instance 0: enum-marco-axp: CXps"), "{text}");
    // the second rule alone still shows the disagreement
    assert!(text.contains("minimized model:\nfeature x1"));
    assert!(!text.contains("x1=1 & x2=1"), "{text}");

    let (mut out, mut err) = (Vec::new(), Vec::new());
    assert_eq!(cmd_verify(&cfg, &mut out, &mut err, &sat_enumerator), EXIT_OK);
}
