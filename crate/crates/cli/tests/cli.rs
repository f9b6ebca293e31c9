use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use measure_audit::{BinaryCounts, ConfusionMatrix};
use measure_audit_cli::config::InputFormat;
use measure_audit_cli::input::{matrix_to_json, parse_inputs, read_matrix_json, Parsed};
use proptest::prelude::*;
use tempfile::TempDir;

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_measure-audit"))
        .args(args)
        .env_remove("MEASURE_AUDIT_BUDGET")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn labels_are_recounted_into_a_matrix() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "l.csv", "true,pred\n1,1\n1,1\n0,1\n");
    let (parsed, summary) = parse_inputs(&p, InputFormat::LabelsCsv, None).unwrap();
    assert_eq!(
        parsed.matrix().unwrap(),
        ConfusionMatrix::from_rows(&[[0, 1], [0, 2]]).unwrap()
    );
    assert_eq!(summary.alphabet, vec!["0", "1"]);
    assert_eq!(summary.elements, Some(3));
}

#[test]
fn matrix_json_gives_binary_counts() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "m.json", "[[0,6],[6,0]]");
    let (parsed, _) = parse_inputs(&p, InputFormat::MatrixJson, None).unwrap();
    let Parsed::Matrix(c) = parsed else {
        panic!("expected a matrix")
    };
    assert_eq!(c.binary().unwrap(), BinaryCounts::from_ints(0, 6, 6, 0).unwrap());
}

#[test]
fn malformed_inputs_are_rejected() {
    let dir = TempDir::new().unwrap();
    let neg = write(&dir, "neg.csv", "1,2\n-1,3\n");
    assert!(parse_inputs(&neg, InputFormat::MatrixCsv, None).is_err());
    let ragged = write(&dir, "ragged.csv", "1,2\n3\n");
    assert!(parse_inputs(&ragged, InputFormat::MatrixCsv, None).is_err());
    let ragged_json = write(&dir, "ragged.json", "[[1,2],[3]]");
    assert!(parse_inputs(&ragged_json, InputFormat::MatrixJson, None).is_err());
    let ragged_labels = write(&dir, "rl.csv", "0,1\n1\n");
    assert!(parse_inputs(&ragged_labels, InputFormat::LabelsCsv, None).is_err());
    let words = write(&dir, "w.csv", "cat,dog\ndog,dog\n");
    assert!(parse_inputs(&words, InputFormat::LabelsCsv, None).is_err());
}

#[test]
fn alphabets_map_labels_in_order() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "w.csv", "cat,dog\ndog,dog\nbird,cat\n");
    let alpha = ["dog".to_string(), "cat".to_string(), "bird".to_string()];
    let (parsed, summary) = parse_inputs(&p, InputFormat::LabelsCsv, Some(&alpha)).unwrap();
    assert_eq!(
        parsed.matrix().unwrap(),
        ConfusionMatrix::from_rows(&[[1, 0, 0], [1, 0, 0], [0, 1, 0]]).unwrap()
    );
    assert_eq!(summary.alphabet, alpha);
    let short = ["dog".to_string(), "cat".to_string()];
    assert!(parse_inputs(&p, InputFormat::LabelsCsv, Some(&short)).is_err());
}

proptest! {
    #[test]
    fn matrix_json_round_trips(m in 2usize..5, cells in proptest::collection::vec(0u64..1000, 16)) {
        prop_assume!(cells[..m * m].iter().any(|&x| x > 0));
        let c = ConfusionMatrix::from_counts(m, &cells[..m * m]).unwrap();
        prop_assert_eq!(read_matrix_json(&matrix_to_json(&c)).unwrap(), c);
    }

    #[test]
    fn fractional_matrices_round_trip(num in proptest::collection::vec(1i64..50, 4), den in 1i64..9) {
        let c = ConfusionMatrix::from_rows(&[[num[0], num[1]], [num[2], num[3]]]).unwrap();
        let scaled = c.scale(&measure_audit::value::ratio(1, den)).unwrap();
        prop_assert_eq!(read_matrix_json(&matrix_to_json(&scaled)).unwrap(), scaled);
    }
}

#[test]
fn eval_annotates_arithmetic_class() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", "[[4,1],[2,3]]");
    let o = cli(&[
        "eval",
        "--matrix",
        s(&m),
        "--measures",
        "acc,cc,sba",
        "--format",
        "json",
        "--no-timestamp",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let values = doc["data"]["values"].as_array().unwrap();
    assert_eq!(values.len(), 3);
    assert_eq!(values[0]["value"]["exact"], "7/10");
    assert_eq!(values[0]["value"]["kind"], "rational");
    assert_eq!(values[1]["value"]["kind"], "surd");
    assert!(doc.get("generated_at").is_none());
}

#[test]
fn eval_emits_a_matrix_that_parses_back() {
    let dir = TempDir::new().unwrap();
    let labels = write(&dir, "l.csv", "a,b\nb,b\nc,a\na,a\n");
    let out = dir.path().join("out.json");
    let o = cli(&[
        "eval",
        "--labels",
        s(&labels),
        "--alphabet",
        "a,b,c",
        "--emit-matrix",
        s(&out),
        "--no-timestamp",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let c = read_matrix_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(
        c,
        ConfusionMatrix::from_rows(&[[1, 1, 0], [0, 1, 0], [1, 0, 0]]).unwrap()
    );
    assert!(stdout(&o).contains("a=0, b=1, c=2"));
}

#[test]
fn reports_are_byte_identical_without_timestamps() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.csv", "5,1,0\n2,3,1\n0,1,4\n");
    for format in ["json", "markdown", "csv"] {
        let args = ["eval", "--matrix", s(&m), "--format", format, "--no-timestamp"];
        assert_eq!(cli(&args).stdout, cli(&args).stdout, "{format}");
    }
    let args = [
        "audit",
        "--binary",
        "--n-max",
        "5",
        "--measures",
        "acc,cc",
        "--format",
        "json",
        "--no-timestamp",
    ];
    assert_eq!(cli(&args).stdout, cli(&args).stdout);
    let stamped = stdout(&cli(&["eval", "--matrix", s(&m), "--format", "json"]));
    assert!(stamped.contains("generated_at"));
}

#[test]
fn output_flag_writes_the_report() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", "[[1,0],[0,1]]");
    let out = dir.path().join("r.md");
    let o = cli(&[
        "eval",
        "--matrix",
        s(&m),
        "--measures",
        "acc",
        "--output",
        s(&out),
        "--no-timestamp",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert!(fs::read_to_string(&out)
        .unwrap()
        .contains("| Acc | acc | 1.000000 | 1 | rational |"));
}

#[test]
fn exit_codes_separate_input_errors_from_budget_aborts() {
    let dir = TempDir::new().unwrap();
    let neg = write(&dir, "neg.json", "[[1,-1],[0,1]]");
    assert_eq!(cli(&["eval", "--matrix", s(&neg)]).status.code(), Some(2));
    let missing = dir.path().join("nope.json");
    assert_eq!(cli(&["eval", "--matrix", s(&missing)]).status.code(), Some(2));
    let m = write(&dir, "m.json", "[[1,2],[3,4]]");
    assert_eq!(
        cli(&["eval", "--matrix", s(&m), "--measures", "bogus"]).status.code(),
        Some(2)
    );
    assert_eq!(cli(&["audit", "--bogus-flag"]).status.code(), Some(2));

    let o = cli(&[
        "audit",
        "--binary",
        "--measures",
        "acc",
        "--properties",
        "Mon",
        "--budget",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let o = Command::new(env!("CARGO_BIN_EXE_measure-audit"))
        .args(["distinguish", "--n", "6"])
        .env("MEASURE_AUDIT_BUDGET", "100")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn binary_audit_grid() {
    let o = cli(&[
        "audit",
        "--measures",
        "acc,cc,ba",
        "--binary",
        "--n-max",
        "6",
        "--format",
        "csv",
        "--no-timestamp",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("Properties with 2 classes"));
    assert_eq!(lines.next(), Some("measure,Max,Min,CSym,Sym,Dist,Mon,SMon,CB,ACB"));
    assert_eq!(lines.next(), Some("Acc,✓,✓,✓,✓,✓,✓,✓,✗,✗"));
    assert_eq!(lines.next(), Some("CC,✓,✓,✓,✓,✗,✓,✓,✓,✓"));
    assert!(text.contains("\nCounterexamples\n"));
}

#[test]
fn distinguish_rows() {
    let o = cli(&[
        "distinguish",
        "--n",
        "2:5",
        "--measures",
        "acc,ba,f:beta=1,kappa,ce,gm:r=1,cc,sba",
        "--format",
        "json",
        "--no-timestamp",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let results = doc["data"]["results"].as_array().unwrap();
    assert_eq!(results.len(), 4);
    for r in results {
        assert_eq!(r["method"], "literal");
        let groups = r["report"]["groups"].as_array().unwrap();
        assert!(!groups.is_empty());
    }
    let md = stdout(&cli(&["distinguish", "--n", "4:5", "--no-timestamp"]));
    assert!(md.contains("## Indistinguishable measures"));
    assert!(md.contains("| n | groups |"));
}

#[test]
fn compare_and_rank_label_files() {
    let dir = TempDir::new().unwrap();
    let truth = [1, 1, 1, 0, 0, 0, 0, 1, 0, 0];
    let preds = [
        [1, 1, 0, 0, 0, 0, 0, 1, 0, 0],
        [1, 1, 1, 1, 1, 0, 0, 1, 0, 0],
        [0, 1, 0, 0, 0, 0, 1, 1, 0, 0],
    ];
    let files: Vec<String> = preds
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let body: String = truth.iter().zip(p).map(|(t, y)| format!("{t},{y}\n")).collect();
            let path = write(&dir, &format!("m{k}.csv"), &format!("true,pred\n{body}"));
            format!("model{k}={}", path.display())
        })
        .collect();
    let mut args = vec!["compare".to_string()];
    for f in &files {
        args.push("--model".into());
        args.push(f.clone());
    }
    args.extend(["--format", "json", "--no-timestamp"].map(String::from));
    let o = Command::new(env!("CARGO_BIN_EXE_measure-audit"))
        .args(&args)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["data"]["inconsistency"]["comparisons"], 3);
    assert_eq!(doc["data"]["inconsistency"]["pairs"].as_array().unwrap().len(), 28);

    args[0] = "rank".into();
    let o = Command::new(env!("CARGO_BIN_EXE_measure-audit"))
        .args(&args)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let columns = doc["data"]["ranking"]["columns"].as_array().unwrap();
    let acc = columns.iter().find(|c| c["measure"] == "Acc").unwrap();
    assert_eq!(acc["ranks"], serde_json::json!([1, 2, 3]));

    let other = write(&dir, "other.csv", "0,0\n1,1\n0,1\n1,1\n0,0\n0,0\n0,0\n1,1\n0,0\n0,0\n");
    let o = cli(&["rank", "--model", &files[0], "--model", s(&other)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn baseline_prints_exact_expectation() {
    let o = cli(&[
        "baseline",
        "--a",
        "5,5",
        "--b",
        "4,6",
        "--measures",
        "cc,acc",
        "--format",
        "json",
        "--no-timestamp",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["data"]["values"][0]["expected"]["exact"], "0");
    assert_eq!(doc["data"]["values"][1]["expected"]["exact"], "1/2");
    assert_eq!(cli(&["baseline", "--a", "5,5", "--b", "4,5"]).status.code(), Some(2));
}
