use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn synergy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_synergy"))
        .args(args)
        .env_remove("SYNERGY_ORACLE_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = synergy(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    stdout(&out)
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn count_values() {
    assert_eq!(
        ok(&["count", "--layers", "9", "--devices", "3"]).trim(),
        "1971"
    );
    assert_eq!(
        ok(&["count", "--layers", "1", "--devices", "1"]).trim(),
        "1"
    );
    let text = ok(&["count", "--pipelines", "9,14,19", "--devices", "3"]);
    assert!(text.lines().any(|l| l == "product 90190202571"), "{text}");
    assert!(text.lines().any(|l| l == "sum 16173"), "{text}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(
        synergy(&["count", "--layers", "0", "--devices", "3"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(synergy(&["count", "--devices", "3"]).status.code(), Some(1));
    assert_eq!(synergy(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        synergy(&["plan", "--fixture", "workload1", "--strategy", "greedy"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        synergy(&["plan", "--fixture", "workload9"]).status.code(),
        Some(1)
    );
    assert_eq!(synergy(&["--help"]).status.code(), Some(0));
    assert_eq!(synergy(&["--version"]).status.code(), Some(0));
}

#[test]
fn mobilenet_plan_is_split() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plan.json");
    ok(&[
        "plan",
        "--fixture",
        "workload4",
        "--strategy",
        "synergy",
        "-o",
        path.to_str().unwrap(),
    ]);
    let doc = json_file(&path);
    let tasks = doc["plan"]["plans"][0]["tasks"].as_array().unwrap();
    let chunks = tasks.iter().filter(|t| t["kind"] == "inference").count();
    assert!(chunks >= 2, "{chunks}");
    let meta = json_file(&dir.path().join("plan.json.meta.json"));
    assert_eq!(meta["command"], "plan");
    assert!(meta["tool_version"].is_string());
}

#[test]
fn independent_model_is_out_of_resource() {
    let out = synergy(&["plan", "--fixture", "workload1", "--strategy", "indmodel"]);
    assert_eq!(out.status.code(), Some(3));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["error"], "OOR");
    assert!(doc["plan"]["plans"].is_array());
}

#[test]
fn oracle_budget_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_synergy"))
        .args(["plan", "--fixture", "workload1", "--strategy", "oracle"])
        .env("SYNERGY_ORACLE_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn simulate_rejects_zero_runs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plan.json");
    ok(&[
        "plan",
        "--fixture",
        "workload3",
        "-o",
        path.to_str().unwrap(),
    ]);
    let out = synergy(&[
        "simulate",
        "--fixture",
        "workload3",
        "--plan",
        path.to_str().unwrap(),
        "--runs",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn single_run_makespan_equals_plan_latency() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    ok(&[
        "plan",
        "--fixture",
        "workload4",
        "-o",
        plan.to_str().unwrap(),
    ]);
    let latency = json_file(&plan)["estimate"]["latency_s"].as_f64().unwrap();
    let text = ok(&[
        "simulate",
        "--fixture",
        "workload4",
        "--plan",
        plan.to_str().unwrap(),
        "--runs",
        "1",
        "--mode",
        "seq",
    ]);
    let rows = csv_rows(&text);
    let col = rows[0].iter().position(|h| h == "makespan_s").unwrap();
    let makespan: f64 = rows[1][col].parse().unwrap();
    assert!((makespan - latency).abs() < 1e-9, "{makespan} vs {latency}");
}

#[test]
fn simulate_modes_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let trace = dir.path().join("trace.jsonl");
    ok(&[
        "plan",
        "--fixture",
        "workload2",
        "-o",
        plan.to_str().unwrap(),
    ]);
    let text = ok(&[
        "simulate",
        "--fixture",
        "workload2",
        "--plan",
        plan.to_str().unwrap(),
        "--mode",
        "all",
        "--runs",
        "8",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    let rows = csv_rows(&text);
    let header = &rows[0];
    let mode = header.iter().position(|h| h == "mode").unwrap();
    let tp = header.iter().position(|h| h == "throughput").unwrap();
    let throughput = |m: &str| -> f64 {
        rows.iter().find(|r| r[mode] == m).unwrap()[tp]
            .parse()
            .unwrap()
    };
    assert!(throughput("inter-run") >= throughput("seq"));
    assert!(std::fs::metadata(&trace).unwrap().len() > 0);
}

#[test]
fn compare_baselines_on_efficientnet() {
    let text = ok(&[
        "compare",
        "--fixture",
        "workload3",
        "--strategies",
        "mindev,maxdev,primindev,primaxdev,indmodel,jointmodel,indbest",
    ]);
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 8);
    let status = rows[0].iter().position(|h| h == "status").unwrap();
    assert!(rows[1..].iter().all(|r| r[status] != "budget"));
}

#[test]
fn compare_power_row_is_minimal() {
    let text = ok(&[
        "compare",
        "--fixture",
        "workload1",
        "--objective",
        "power",
        "--strategies",
        "synergy,mindev,maxdev,jointmodel,indbest",
    ]);
    let rows = csv_rows(&text);
    let h = &rows[0];
    let (st, pw, status) = (
        h.iter().position(|c| c == "strategy").unwrap(),
        h.iter().position(|c| c == "avg_power_w").unwrap(),
        h.iter().position(|c| c == "status").unwrap(),
    );
    let ok_rows: Vec<_> = rows[1..].iter().filter(|r| r[status] == "ok").collect();
    let synergy: f64 = ok_rows.iter().find(|r| r[st] == "synergy").unwrap()[pw]
        .parse()
        .unwrap();
    for r in &ok_rows {
        let p: f64 = r[pw].parse().unwrap();
        assert!(synergy <= p + 1e-6, "{r:?}");
    }
}

#[test]
fn outputs_are_deterministic() {
    let args = ["compare", "--fixture", "workload2", "--format", "json"];
    assert_eq!(ok(&args), ok(&args));
    let args = ["plan", "--fixture", "workload1"];
    assert_eq!(ok(&args), ok(&args));
}

#[test]
fn fixtures_list_and_check() {
    let list = ok(&["fixtures", "list"]);
    assert!(
        list.contains("workload1") && list.contains("wearables"),
        "{list}"
    );
    ok(&["fixtures", "check"]);
    let dir = tempfile::tempdir().unwrap();
    ok(&["fixtures", "export", dir.path().to_str().unwrap()]);
    assert!(dir.path().join("models.json").exists());
}
