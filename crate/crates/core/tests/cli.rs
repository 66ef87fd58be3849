use std::process::{Command, Output};

fn qshell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qshell"))
        .args(args)
        .env_remove("QSHELL_DATA_DIR")
        .output()
        .expect("run qshell")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn table_defaults_reproduce_reference() {
    let o = qshell(&["table"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let level_rows = text.lines().skip(2).filter(|l| !l.starts_with("| | |")).count();
    assert_eq!(level_rows, 62);
    assert_eq!(text.matches("**").count() / 2, 25);
    assert!(text.lines().nth(2).unwrap().starts_with("| 0 | 0 | 0.000 | 2 | **2** |"));
}

#[test]
fn table_csv_first_row() {
    let o = qshell(&["table", "--format", "csv"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,l,energy,degeneracy,cumulative,gap_after,is_magic");
    assert_eq!(lines.next().unwrap(), "0,0,0.000,2,2,1.000,true");
}

#[test]
fn table_classical_limit() {
    let o = qshell(&["magic", "--tau", "0", "--e-cut", "7.5", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["magic"], serde_json::json!([2, 8, 20, 40, 70, 112, 168]));
}

#[test]
fn negative_cut_is_rejected() {
    let o = qshell(&["table", "--e-cut", "-1"]);
    assert!(!o.status.success());
    assert!(o.stdout.is_empty());
}

#[test]
fn compare_exit_statuses() {
    let o = qshell(&["compare", "--mode", "row"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    // under printed uncertainties alone some predictions lack support
    let o = qshell(&["compare", "--mode", "strict"]);
    assert_eq!(o.status.code(), Some(2));

    let o = qshell(&["compare", "--refs", "foo"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("foo"));
}

#[test]
fn compare_against_knight_reports_beyond_92() {
    let o = qshell(&["compare", "--refs", "knight", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let spurious: Vec<u64> = v["spurious"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert!(spurious.iter().all(|&s| s > 92 || s == 34));
    assert!(spurious.contains(&138) && spurious.contains(&1502));
    assert_eq!(v["misses"].as_array().unwrap().len(), 0);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scan_grid_size() {
    let o = qshell(&["scan", "--tau", "0.03:0.05:21", "--threshold", "0.3:0.5:21"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 1 + 441);
}

#[test]
fn scan_single_threshold_line() {
    let o = qshell(&["scan", "--tau", "0.038", "--threshold", "0.3:0.3:1"]);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    let magic: Vec<u32> = rows[0].rsplit(',').next().unwrap().split(' ').map(|t| t.parse().unwrap()).collect();
    assert!(magic.contains(&186) && magic.contains(&542));
}

#[test]
fn scan_stability_reference() {
    let o = qshell(&[
        "scan", "--tau", "0.03:0.05:21", "--threshold", "0.3:0.5:21", "--stability", "reference", "--format", "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let region = v["stability"]["region"].as_array().unwrap();
    assert!(region.iter().any(|p| {
        (p[0].as_f64().unwrap() - 0.038).abs() < 1e-9 && (p[1].as_f64().unwrap() - 0.39).abs() < 1e-9
    }));
}

#[test]
fn scan_malformed_range() {
    let o = qshell(&["scan", "--tau", "0.05:0.03:3"]);
    assert!(!o.status.success());
    let o = qshell(&["scan", "--threshold", "0.3-0.5"]);
    assert!(!o.status.success());
}

#[test]
fn identical_invocations_identical_output() {
    let a = qshell(&["scan", "--tau", "0.03:0.05:5", "--threshold", "0.3:0.5:5", "--format", "json"]);
    let b = qshell(&["scan", "--tau", "0.03:0.05:5", "--threshold", "0.3:0.5:5", "--format", "json"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn datasets_listing_and_lookup() {
    let o = qshell(&["datasets", "knight", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["values"].as_array().unwrap().len(), 6);

    let o = qshell(&["datasets"]);
    assert!(stdout(&o).contains("198±2"));
    assert!(stdout(&o).contains("(356)"));

    let o = qshell(&["datasets", "nope"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn user_dataset_from_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("lab.json"),
        r#"{"id":"lab","kind":"experiment","source":"bench","values":[{"n":2},{"n":8},{"n":20}]}"#,
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qshell"))
        .args(["compare", "--refs", "lab", "--format", "json"])
        .env("QSHELL_DATA_DIR", dir.path())
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["matches"].as_array().unwrap().len(), 3);
}

#[test]
fn user_dataset_file_flag() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mine.json");
    std::fs::write(
        &path,
        r#"{"id":"mine","kind":"model","source":"calc","values":[{"n":2},{"n":8}]}"#,
    )
    .unwrap();
    let o = qshell(&["compare", "--refs", "mine", "--dataset-file", path.to_str().unwrap(), "--format", "csv"]);
    assert!(stdout(&o).starts_with("predicted,mine,status\n"));
}
