use std::io::Write as _;
use std::process::Command;

use flexcount::cli::{run, EXIT_CAP, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};
use flexcount::optimize::{read_landscape_csv, LANDSCAPE_HEADER};
use flexcount::verify::REPORT_HEADER;
use serde_json::Value;

fn invoke(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("flexcount").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn temp_cnf(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn optimize_reports_table_rows() {
    let (code, out, _) = invoke(&["optimize", "--epsilon", "0.8", "--delta", "0.001", "--mode", "flexmc"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!((v["thresh"].as_u64(), v["t"].as_u64()), (Some(52), Some(13)));
    for key in ["rnd", "a_u", "p_l", "p_u", "obj"] {
        assert!(v[key].is_number(), "{key}");
    }

    let (code, out, _) = invoke(&["optimize", "--epsilon", "0.4", "--delta", "0.001", "--mode", "approxmc6"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!((v["thresh"].as_u64(), v["t"].as_u64()), (Some(155), Some(37)));
}

#[test]
fn optimize_plain_format() {
    let (code, out, _) = invoke(&["optimize", "--format", "plain"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.lines().any(|l| l == "thresh 52"));
    assert!(out.lines().any(|l| l == "t 13"));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["optimize", "--epsilon", "0", "--delta", "0.5"][..],
        &["optimize", "--delta", "0"],
        &["optimize", "--delta", "1.5"],
        &["verify", "--trials", "0"],
        &["landscape", "--grid-steps", "0"],
        &["landscape", "--grid-thresh-lo", "10", "--grid-thresh-hi", "5"],
        &["landscape", "--epsilon", "0.4", "--grid-a-lo", "0.5"],
        &["count"],
        &["frobnicate"],
    ] {
        let (code, _, err) = invoke(args);
        assert_eq!(code, EXIT_USAGE, "{args:?}");
        assert!(!err.is_empty(), "{args:?}");
    }
}

#[test]
fn help_exits_0() {
    let (code, out, _) = invoke(&["--help"]);
    assert_eq!(code, EXIT_OK);
    for sub in ["optimize", "count", "landscape", "verify"] {
        assert!(out.contains(sub));
    }
    assert!(!out.contains("inject"));
}

#[test]
fn count_early_exact() {
    let f = temp_cnf("p cnf 2 1\n1 2 0\n");
    let (code, out, _) = invoke(&["count", f.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let mut lines = out.splitn(2, '\n');
    assert_eq!(lines.next(), Some("s mc 3"));
    let meta: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(meta["path"], "early_exact");
    assert_eq!(meta["thresh"], 52);
    assert!(meta.get("runtime_ms").is_none());
}

#[test]
fn count_is_deterministic_per_seed() {
    let f = temp_cnf("p cnf 12 1\n1 2 0\n");
    let path = f.path().to_str().unwrap();
    let a = invoke(&["count", path, "--seed", "7"]);
    let b = invoke(&["count", path, "--seed", "7"]);
    assert_eq!(a.0, EXIT_OK);
    assert_eq!(a, b);
    let meta: Value = serde_json::from_str(a.1.split_once('\n').unwrap().1).unwrap();
    assert_eq!(meta["path"], "normal");
    assert_eq!(meta["outcomes"].as_array().unwrap().len(), 13);
    assert_eq!(meta["seed"], 7);
}

#[test]
fn count_raw_and_timing() {
    let f = temp_cnf("p cnf 12 1\n1 2 0\n");
    let path = f.path().to_str().unwrap();
    let (code, out, _) = invoke(&["count", path, "--raw", "--timing", "--mode", "approxmc6"]);
    assert_eq!(code, EXIT_OK);
    let (first, rest) = out.split_once('\n').unwrap();
    let est: f64 = first.strip_prefix("s mc ").unwrap().parse().unwrap();
    let meta: Value = serde_json::from_str(rest).unwrap();
    assert_eq!(meta["estimate"].as_f64(), Some(est));
    assert!(meta["runtime_ms"].as_f64().unwrap() >= 0.0);
    assert_eq!(meta["t"], 19);
}

#[test]
fn count_parse_error_exits_2() {
    let f = temp_cnf("p cnf 2 1\n1 3 0\n");
    let (code, _, err) = invoke(&["count", f.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("line 2"), "{err}");
    let (code, _, _) = invoke(&["count", "/nonexistent/file.cnf"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn count_enumeration_cap_exits_3() {
    let f = temp_cnf("p cnf 30 1\n1 2 0\n");
    let (code, _, err) = invoke(&["count", f.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_CAP, "{err}");
}

#[test]
fn landscape_csv_round_trips() {
    let args = [
        "landscape",
        "--epsilon",
        "0.4",
        "--delta",
        "0.001",
        "--grid-thresh-lo",
        "160",
        "--grid-thresh-hi",
        "165",
        "--grid-a-hi",
        "1.1",
        "--grid-steps",
        "41",
    ];
    let (code, out, _) = invoke(&args);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().next().unwrap(), LANDSCAPE_HEADER.join(","));
    let rows = read_landscape_csv(out.as_bytes()).unwrap();
    assert_eq!(rows.len(), 6 * 41);
    assert!(rows.iter().filter(|r| r.a_u >= 1.0).all(|r| r.p_u == 1.0 && r.obj.is_none()));
    assert_eq!(rows.iter().filter_map(|r| r.obj).min(), Some(2119));
}

#[test]
fn verify_passes_and_detects_injection() {
    let (code, out, _) = invoke(&["verify", "--trials", "500"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().next().unwrap(), REPORT_HEADER);
    assert!(out.lines().skip(1).all(|l| l.ends_with(",true")));

    let (code, out, _) = invoke(&["verify", "--trials", "10", "--inject-invalid"]);
    assert_eq!(code, EXIT_FAILURE);
    assert!(out.lines().any(|l| l.ends_with(",false")));
}

#[test]
fn binary_honours_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_flexcount");
    let status = Command::new(bin).args(["optimize", "--epsilon", "-1"]).output().unwrap();
    assert_eq!(status.status.code(), Some(EXIT_USAGE));
    let ok = Command::new(bin).args(["optimize", "--format", "plain"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("thresh 52"));
}

fn assert_matches_schema(name: &str, doc: &Value) {
    let path = format!("{}/../../docs/schema/{name}.schema.json", env!("CARGO_MANIFEST_DIR"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).unwrap();
    if let Err(errors) = compiled.validate(doc) {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("{name}: {msgs:?}");
    };
}

#[test]
fn json_outputs_match_documented_schemas() {
    for mode in ["flexmc", "approxmc6"] {
        let (_, out, _) = invoke(&["optimize", "--epsilon", "0.4", "--mode", mode]);
        assert_matches_schema("optimize", &serde_json::from_str(&out).unwrap());
    }
    let small = temp_cnf("p cnf 2 1\n1 2 0\n");
    let big = temp_cnf("c ind 1 2 3 4 5 6 7 8 9 10 0\np cnf 14 1\n1 -2 0\n");
    let full = temp_cnf("p cnf 3 0\n");
    for (f, extra) in [(&small, None), (&big, Some("--timing")), (&full, None)] {
        let mut args = vec!["count", f.path().to_str().unwrap(), "--delta", "0.1"];
        args.extend(extra);
        let (code, out, _) = invoke(&args);
        assert_eq!(code, EXIT_OK);
        assert_matches_schema("count", &serde_json::from_str(out.split_once('\n').unwrap().1).unwrap());
    }
}
