use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gaussdiv"));
    c.env("RUST_LOG", "error");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

// Deterministic pseudo-random rows without pulling in an RNG.
fn labelled_csv(per_class: usize, d: usize, shift: f64) -> String {
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut text = String::from("label");
    for j in 0..d {
        text.push_str(&format!(",f{j}"));
    }
    text.push('\n');
    for (label, off) in [("a", 0.0), ("b", shift)] {
        for _ in 0..per_class {
            text.push_str(label);
            for _ in 0..d {
                text.push_str(&format!(",{}", next() * 2.0 + off));
            }
            text.push('\n');
        }
    }
    text
}

const A: &str = r#"{"mean":[0.5,-1.0,2.0],"cov":[[2.0,0.3,0.1],[0.3,1.0,-0.2],[0.1,-0.2,1.5]]}"#;
const B: &str = r#"{"mean":[0.0,0.0,1.0],"cov":[[1.0,0.0,0.0],[0.0,3.0,0.5],[0.0,0.5,1.0]]}"#;

#[test]
fn identical_summaries_have_zero_kl() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "a.json", A);
    let v = json_stdout(&run(&["dist", "--x", s(&a), "--y", s(&a), "--family", "kl"]));
    assert_eq!(v["family"], "kl");
    assert!(v["value"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn logphi_zero_is_kl_over_half_dimension() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "a.json", A);
    let b = write(dir.path(), "b.json", B);
    let kl = json_stdout(&run(&["dist", "--x", s(&a), "--y", s(&b), "--family", "kl"]))["value"]
        .as_f64()
        .unwrap();
    let lp = json_stdout(&run(&[
        "dist",
        "--x",
        s(&a),
        "--y",
        s(&b),
        "--family",
        "logphi-p-jb",
        "--p",
        "0",
    ]));
    assert_eq!(lp["params"]["p"], 0.0);
    let ratio = lp["value"].as_f64().unwrap() / kl;
    assert!((ratio - 2.0 / 3.0).abs() < 1e-10, "ratio {ratio}");
}

#[test]
fn energy_on_summaries_exits_two() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "a.json", A);
    let out = run(&["dist", "--x", s(&a), "--y", s(&a), "--family", "energy", "--delta", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "UnsupportedForSummaries");
}

#[test]
fn wrong_parameter_flag_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "a.json", A);
    let out = run(&["dist", "--x", s(&a), "--y", s(&a), "--family", "kl", "--k", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&[
        "dist",
        "--x",
        s(&a),
        "--y",
        s(&a),
        "--family",
        "logsimplicial-jb",
        "--k",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_error_names_row_and_column() {
    let dir = TempDir::new().unwrap();
    let x = write(dir.path(), "x.csv", "1,2\n3,4\n5,oops\n");
    let out = run(&["dist", "--x", s(&x), "--y", s(&x), "--family", "kl"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "ParseError");
    let msg = err["message"].as_str().unwrap();
    assert!(msg.contains("row 3") && msg.contains("column 2"), "{msg}");
}

#[test]
fn ragged_rows_are_rejected() {
    let dir = TempDir::new().unwrap();
    let x = write(dir.path(), "x.csv", "1,2\n3,4,5\n5,6\n");
    let out = run(&["dist", "--x", s(&x), "--y", s(&x), "--family", "kl"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "InconsistentArity");
}

#[test]
fn class_column_splits_one_file() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "wine.csv", &labelled_csv(30, 3, 1.0));
    let base = ["--x", s(&f), "--header", "--class-column", "0", "--x-class", "a"];
    let mut args = vec!["dist"];
    args.extend(base);
    args.extend(["--y-class", "b", "--family", "bhattacharyya"]);
    let v = json_stdout(&run(&args));
    assert!(v["value"].as_f64().unwrap() > 0.0);

    // Same class on both sides gives zero.
    let mut args = vec!["dist"];
    args.extend(base);
    args.extend(["--y-class", "a", "--family", "bhattacharyya"]);
    assert!(json_stdout(&run(&args))["value"].as_f64().unwrap().abs() < 1e-12);

    // Unknown label.
    let mut args = vec!["dist"];
    args.extend(base);
    args.extend(["--y-class", "zzz", "--family", "kl"]);
    assert_eq!(run(&args).status.code(), Some(2));
}

#[test]
fn summary_round_trip_reproduces_distances() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "d.csv", &labelled_csv(25, 4, 0.3));
    let xs = dir.path().join("xs.json");
    let ys = dir.path().join("ys.json");
    for family in [
        vec!["--family", "kl"],
        vec!["--family", "js"],
        vec!["--family", "logphi-p-br", "--p", "0.5"],
        vec!["--family", "logsimplicial-jb", "--k", "3"],
    ] {
        let mut args = vec![
            "dist",
            "--x",
            s(&f),
            "--header",
            "--class-column",
            "0",
            "--x-class",
            "a",
            "--y-class",
            "b",
        ];
        args.extend(["--x-summary-out", s(&xs), "--y-summary-out", s(&ys)]);
        args.extend(&family);
        let from_csv = json_stdout(&run(&args))["value"].as_f64().unwrap();
        let mut args = vec!["dist", "--x", s(&xs), "--y", s(&ys)];
        args.extend(&family);
        let from_json = json_stdout(&run(&args))["value"].as_f64().unwrap();
        assert!(
            (from_csv - from_json).abs() <= 1e-12 * (1.0 + from_csv.abs()),
            "{family:?}: {from_csv} vs {from_json}"
        );
    }
}

#[test]
fn roc_writes_csv_and_summary() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "d.csv", &labelled_csv(40, 3, 0.8));
    let out_csv = dir.path().join("roc.csv");
    let v = json_stdout(&run(&[
        "roc",
        "--x",
        s(&f),
        "--header",
        "--class-column",
        "0",
        "--x-class",
        "a",
        "--y-class",
        "b",
        "--family",
        "bhattacharyya",
        "--seed",
        "11",
        "--N",
        "30",
        "--out",
        s(&out_csv),
    ]));
    assert_eq!(v["pairs"], 30);
    let text = std::fs::read_to_string(&out_csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("threshold,fpr,tpr"));
    assert!(text.trim_end().ends_with("-inf,1,1"));
    let auc = v["auc"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&auc));
}

#[test]
fn select_reports_table_and_choice() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "d.csv", &labelled_csv(40, 3, 0.5));
    let v = json_stdout(&run(&[
        "select",
        "--x",
        s(&f),
        "--header",
        "--class-column",
        "0",
        "--x-class",
        "a",
        "--y-class",
        "b",
        "--family",
        "logphi-p-jb",
        "--grid",
        "0,0.25,0.5,0.75",
        "--seed",
        "5",
        "--N",
        "40",
    ]));
    let table = v["auc_by_param"].as_array().unwrap();
    assert_eq!(table.len(), 4);
    let sel = v["selected"].as_f64().unwrap();
    let best = table.iter().filter_map(|r| r["auc"].as_f64()).fold(f64::MIN, f64::max);
    let first_best = table.iter().find(|r| r["auc"].as_f64() == Some(best)).unwrap();
    assert_eq!(first_best["param"].as_f64(), Some(sel));
}

#[test]
fn select_needs_a_parameterised_family() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "d.csv", &labelled_csv(20, 2, 0.5));
    let out = run(&[
        "select",
        "--x",
        s(&f),
        "--header",
        "--class-column",
        "0",
        "--x-class",
        "a",
        "--y-class",
        "b",
        "--family",
        "kl",
        "--seed",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn grid_test_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "d.csv", &labelled_csv(40, 3, 0.0));
    let args = [
        "test",
        "--x",
        s(&f),
        "--header",
        "--class-column",
        "0",
        "--x-class",
        "a",
        "--y-class",
        "b",
        "--family",
        "logsimplicial-br",
        "--grid",
        "--seed",
        "2024",
    ];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let v: Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(v["auc_by_param"].as_array().unwrap().len(), 3);
    assert_eq!(v["n_effective"], 35);
}

#[test]
fn seed_is_required_for_stochastic_commands() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "d.csv", &labelled_csv(20, 2, 0.0));
    let out = run(&[
        "test",
        "--x",
        s(&f),
        "--header",
        "--class-column",
        "0",
        "--x-class",
        "a",
        "--y-class",
        "b",
        "--family",
        "kl",
    ]);
    assert!(!out.status.success());
}

#[test]
fn simulate_null_preset_is_near_half() {
    let dir = TempDir::new().unwrap();
    let roc_dir = dir.path().join("roc");
    let v = json_stdout(&run(&[
        "simulate",
        "--example",
        "1",
        "--param",
        "1.0",
        "--reps",
        "200",
        "--seed",
        "9",
        "--roc-dir",
        s(&roc_dir),
    ]));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        let auc = r["auc"].as_f64().unwrap();
        assert!((auc - 0.5).abs() <= 0.1, "{}: {auc}", r["label"]);
    }
    assert_eq!(std::fs::read_dir(&roc_dir).unwrap().count(), 3);
}

#[test]
fn simulate_rejects_out_of_range_parameter() {
    let out = run(&[
        "simulate",
        "--example",
        "2",
        "--param",
        "1.0",
        "--reps",
        "5",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
