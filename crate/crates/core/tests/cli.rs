use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cclab(args: &[&str], out_env: Option<&Path>) -> Output {
    let mut command = Command::new(env!("CARGO_BIN_EXE_cclab"));
    command.args(args).env_remove("CCLAB_OUT");
    if let Some(dir) = out_env {
        command.env("CCLAB_OUT", dir);
    }
    command.output().unwrap()
}

fn specs(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs").join(name).to_string_lossy().into_owned()
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

#[test]
fn rank_prints_normalised_weights() {
    let output = cclab(&["rank", "--judgments", &specs("roadwork_judgments.json")], None);
    assert!(output.status.success());
    let text = stdout(&output);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 8);
    let ranks: Vec<usize> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(ranks, (1..=8).collect::<Vec<_>>());
    let total: f64 = rows.iter().map(|r| r[2].parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-5);
    assert_eq!(rows[0][1], "roadblock_presence");
}

#[test]
fn unknown_flag_exits_with_usage() {
    let output = cclab(&["simulate", "--frobnicate"], None);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("Usage"));
    let output = cclab(&["teleport"], None);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn inconsistent_judgments_give_a_single_line_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cyclic.json");
    fs::write(
        &path,
        r#"{"attributes": ["a", "b", "c"], "judgments": [
            {"a": "a", "b": "b", "value": 9}, {"a": "b", "b": "c", "value": 9}, {"a": "c", "b": "a", "value": 9}]}"#,
    )
    .unwrap();
    let output = cclab(&["rank", "--judgments", path.to_str().unwrap()], None);
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1);
    assert!(stderr.starts_with("error: Inconsistent pairwise comparisons"), "{stderr}");
}

#[test]
fn bad_capacity_is_a_config_error() {
    let output = cclab(&["simulate", "--capacity", "0", "--queries", "5"], None);
    assert_eq!(output.status.code(), Some(4));
    let output = cclab(&["simulate", "--capacity", "lots"], None);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn simulate_is_byte_identical() {
    let args = ["simulate", "--policy", "pfpa", "--threshold", "20", "--queries", "500", "--seed", "7"];
    let a = cclab(&args, None);
    let b = cclab(&args, None);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("policy,threshold,queries,capacity,hits,misses,lookups,expired"));
    assert!(text.lines().nth(1).unwrap().starts_with("pfpa,20,500,100%,"));
}

#[test]
fn replay_reproduces_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let simulated = cclab(&["simulate", "--policy", "lfu", "--capacity", "3", "--queries", "40", "--trace", "--out", out], None);
    assert!(simulated.status.success());
    let trace = dir.path().join("trace_40_20231104.jsonl");
    let replayed = cclab(&["replay", "--trace", trace.to_str().unwrap(), "--policy", "lfu", "--capacity", "3"], None);
    assert!(replayed.status.success(), "{}", String::from_utf8_lossy(&replayed.stderr));
    assert_eq!(simulated.stdout, replayed.stdout);
}

#[test]
fn out_flag_beats_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let spec = specs("table1.json");
    let output = cclab(&["sweep", "--spec", &spec], Some(env_dir.path()));
    assert!(output.status.success());
    assert!(env_dir.path().join("sweep_table1.csv").exists());

    let output = cclab(&["sweep", "--spec", &spec, "--out", flag_dir.path().to_str().unwrap()], Some(env_dir.path()));
    assert!(output.status.success());
    assert!(flag_dir.path().join("sweep_table1.csv").exists());
    assert_eq!(fs::read_dir(flag_dir.path()).unwrap().count(), 4 * 10 + 2);
}

#[test]
fn report_aggregates_cell_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert!(cclab(&["sweep", "--spec", &specs("table1.json"), "--out", out], None).status.success());
    let output = cclab(&["report", out, "--group-by", "threshold"], None);
    assert!(output.status.success());
    let text = stdout(&output);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("threshold,reports,hits_mean,hits_min,hits_max"));
    let thresholds: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(thresholds, vec!["10", "15", "20", "25"]);
    assert!(lines[1..].iter().all(|l| l.split(',').nth(1) == Some("10")));
}
