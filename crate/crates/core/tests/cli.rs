mod common;

use std::process::{Command, Output};

use tempfile::TempDir;

use common::{fixture_dir, write_file};

fn smellscan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smellscan"))
        .args(args)
        .output()
        .unwrap()
}

fn fixtures() -> String {
    fixture_dir().to_string_lossy().into_owned()
}

#[test]
fn clean_fixture_exits_zero_with_fail_on_smell() {
    let out = smellscan(&[&fixtures(), "--include", "clean.py", "--fail-on-smell"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("Findings: 0"));
}

#[test]
fn mock_fixture_fails_with_eight_findings() {
    let out = smellscan(&[
        &fixtures(),
        "--include",
        "mock_smells.py",
        "--fail-on-smell",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["findings"].as_array().unwrap().len(), 8);
    assert_eq!(doc["grand_total"], 8);
}

#[test]
fn missing_root_exits_three() {
    let out = smellscan(&["/no/such/dir/anywhere"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not exist"));
}

#[test]
fn config_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    write_file(dir.path(), "bad.conf", "long_class_lines = banana\n");
    let cfg = dir.path().join("bad.conf");
    let out = smellscan(&[&fixtures(), "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    let out = smellscan(&[&fixtures(), "--format", "yaml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_thresholds_apply() {
    let dir = TempDir::new().unwrap();
    write_file(
        dir.path(),
        "relaxed.conf",
        "# loosen everything\nmax_params = 10\nlong_method_lines = 100\n",
    );
    let cfg = dir.path().join("relaxed.conf");
    let out = smellscan(&[
        &fixtures(),
        "--include",
        "mock_smells.py",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["findings"].as_array().unwrap().len(), 6);
    assert_eq!(doc["config_echo"]["thresholds"]["max_parameters"], 10);
}

#[test]
fn quiet_only_touches_diagnostics() {
    let dir = TempDir::new().unwrap();
    write_file(dir.path(), "noisy.py", b"x = 1\ny = '\xff'\n");
    let root = dir.path().to_str().unwrap();
    let loud = smellscan(&[root]);
    let quiet = smellscan(&[root, "--quiet"]);
    assert_eq!(loud.stdout, quiet.stdout);
    assert_eq!(
        String::from_utf8_lossy(&loud.stderr),
        "NOISE noisy.py:2 undecodable bytes\n"
    );
    assert!(quiet.stderr.is_empty());
}

#[test]
fn csv_directory_output() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("report");
    let out = smellscan(&[
        &fixtures(),
        "--include",
        "mock_smells.py",
        "--format",
        "csv",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let findings = std::fs::read_to_string(out_dir.join("findings.csv")).unwrap();
    assert_eq!(findings.lines().count(), 1 + 8);
    let normalized = std::fs::read_to_string(out_dir.join("normalized.csv")).unwrap();
    assert!(normalized
        .lines()
        .any(|l| l.starts_with("DeadCode,1,1.000,")));
    assert!(out_dir.join("buckets.csv").exists());
}

#[test]
fn unwritable_destination_exits_three() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("missing-dir/report.json");
    let out = smellscan(&[
        &fixtures(),
        "--format",
        "json",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn text_report_lists_kinds_in_order() {
    let out = smellscan(&[&fixtures(), "--include", "mock_smells.py"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let positions: Vec<usize> = [
        "Repetitive Code ",
        "Dead Code ",
        "Multiple Return Statements",
        "Long Statements",
        "Multiple Same Function Names",
        "Long Classes Or Methods",
        "Long Conditionals or Loops",
        "Long Parameter List",
    ]
    .iter()
    .map(|k| {
        text.find(&format!("\n{k}"))
            .unwrap_or_else(|| panic!("{k} missing:\n{text}"))
    })
    .collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn scope_flag_enables_corpus_duplicates() {
    let dir = TempDir::new().unwrap();
    write_file(dir.path(), "a.py", "def run(x):\n    pass\n");
    write_file(dir.path(), "b.py", "def run(y):\n    pass\n");
    let root = dir.path().to_str().unwrap();
    let per_file = smellscan(&[root, "--format", "json"]);
    let corpus = smellscan(&[root, "--format", "json", "--scope", "corpus"]);
    let n = |o: &Output| {
        serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap()["grand_total"]
            .as_u64()
            .unwrap()
    };
    assert_eq!(n(&per_file), 0);
    assert_eq!(n(&corpus), 1);
}
