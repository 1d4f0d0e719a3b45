use std::path::Path;
use std::process::{Command, Output};

use slin_checkers::HistoryTree;
use slin_engine::enumerate::all_runs;
use slin_engine::scenarios::{hw_queue, hw_strong_script, Variant};
use slin_engine::DEFAULT_BUDGET;
use slin_history::jsonl::to_jsonl;
use slin_history::{History, ObjectId, ObjectInfo, ProcessId, SeqSpec, StepKind, Value};

fn slin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn snapshot_report_has_exact_values() {
    let o = slin(&["experiment", "snapshot", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let got: Vec<(String, String, String)> = report["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            (
                r["variant"].as_str().unwrap().to_string(),
                r["value"].as_str().unwrap().to_string(),
                r["verdict"].as_str().unwrap().to_string(),
            )
        })
        .collect();
    let want = [
        ("atomic-strong", "-1"),
        ("atomic-weak", "0"),
        ("implemented-weak", "-2"),
    ];
    assert_eq!(got.len(), want.len());
    for ((v, x, verdict), (wv, wx)) in got.iter().zip(want) {
        assert_eq!((v.as_str(), x.as_str(), verdict.as_str()), (wv, wx, "pass"));
    }
    for r in report["rows"].as_array().unwrap() {
        assert!(!r["citation"].as_str().unwrap().is_empty());
    }
    assert_eq!(report["config"]["seed"], 42);
}

#[test]
fn unknown_experiment_is_a_usage_error() {
    let o = slin(&["experiment", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    for name in [
        "snapshot",
        "srsw-register",
        "mrsw-register",
        "hw-queue",
        "loadbalance",
        "strong-lin-suite",
    ] {
        assert!(err.contains(name), "{err}");
    }
    assert_eq!(slin(&[]).status.code(), Some(2));
}

#[test]
fn csv_has_the_fixed_columns() {
    let o = slin(&["experiment", "hw-queue", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(
        text.lines().next().unwrap(),
        "experiment,variant,metric,value,ci95,expected,citation,verdict"
    );
    assert!(text.contains("hw-queue,atomic-strong,expectation,1/2,,<= 1/2,"));
}

#[test]
fn reports_are_byte_identical_across_runs_and_threads() {
    let args = [
        "experiment",
        "loadbalance",
        "--n",
        "16",
        "--trials",
        "300",
        "--format",
        "csv",
    ];
    let a = slin(&args);
    let b = slin(&[&args[..], &["--threads", "1"]].concat());
    let c = slin(&[&args[..], &["--threads", "3"]].concat());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let other_seed = slin(&[&args[..], &["--seed", "7"]].concat());
    assert_ne!(a.stdout, other_seed.stdout);
}

#[test]
fn non_square_n_is_an_input_error() {
    assert_eq!(
        slin(&["experiment", "loadbalance", "--n", "15"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = slin(&[
        "experiment",
        "srsw-register",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(report["rows"][1]["value"], "1/2");
}

#[test]
fn simulated_histories_linearize() {
    let dir = tempfile::tempdir().unwrap();
    for coins in ["--coins=-1", "--coins=1"] {
        let o = slin(&["simulate", "--scenario", "snapshot", coins, "--interpreted"]);
        assert_eq!(o.status.code(), Some(0));
        let file = write(dir.path(), "h.jsonl", &stdout(&o));
        let l = slin(&["check-lin", &file]);
        assert_eq!(
            l.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&l.stderr)
        );
        let seq = slin_history::jsonl::from_jsonl(&stdout(&l)).unwrap();
        assert!(seq.is_sequential());
    }
}

#[test]
fn simulate_rejects_a_missing_script() {
    let o = slin(&[
        "simulate",
        "--scenario",
        "three-writers",
        "--adversary",
        "weak-script",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = slin(&[
        "simulate",
        "--scenario",
        "three-writers",
        "--adversary",
        "round-robin",
        "--class",
        "strong",
        "--coins",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = slin(&["simulate", "--scenario", "snapshot", "--coins", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stale_read_is_not_linearizable() {
    let mut h = History::new(
        [ProcessId(0), ProcessId(1)],
        [ObjectInfo::base(
            ObjectId(0),
            "X",
            SeqSpec::Register { initial: 0.into() },
        )],
    );
    h.push_atomic(
        ProcessId(0),
        ObjectId(0),
        "write",
        vec![Value::Int(1)],
        Value::Unit,
    );
    h.push(
        StepKind::Inv,
        ProcessId(1),
        ObjectId(0),
        "read",
        Value::Tuple(vec![]),
    );
    h.push(
        StepKind::Rsp,
        ProcessId(1),
        ObjectId(0),
        "read",
        Value::Int(0),
    );
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "h.jsonl", &to_jsonl(&h));
    let o = slin(&["check-lin", &file]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "NONE\n");
}

#[test]
fn unreadable_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{ not json");
    assert_eq!(slin(&["check-lin", &bad]).status.code(), Some(2));
    assert_eq!(slin(&["check-strong-lin", &bad]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(
        slin(&["check-lin", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn empty_tree_has_the_empty_witness() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(
        dir.path(),
        "empty.json",
        r#"{"processes":[],"objects":[],"nodes":[]}"#,
    );
    let o = slin(&["check-strong-lin", &file]);
    assert_eq!(o.status.code(), Some(0));
    let w: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(w, serde_json::json!({"0": []}));
}

#[test]
fn strong_lin_verdicts_from_tree_files() {
    let dir = tempfile::tempdir().unwrap();
    let runs = all_runs(
        &hw_queue(Variant::Implemented),
        hw_strong_script,
        1,
        DEFAULT_BUDGET,
    )
    .unwrap();
    let file = write(
        dir.path(),
        "hw.json",
        &HistoryTree::from_runs(&runs).unwrap().to_json(),
    );
    let o = slin(&["check-strong-lin", &file]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "NONE\n");

    let tree = slin_checkers::example::tree();
    let file = write(dir.path(), "ex.json", &tree.to_json());
    let o = slin(&["check-strong-lin", "--normalize", &file]);
    assert_eq!(o.status.code(), Some(0));
    let w = slin_checkers::Witness::from_json(&tree, &stdout(&o)).unwrap();
    slin_checkers::validate_witness(&tree, &w, &tree.registry().specs()).unwrap();
    slin_checkers::check_normal_form(&tree, &w).unwrap();
}
