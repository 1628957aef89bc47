use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn edufl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edufl")).args(args).output().unwrap()
}

fn out_arg(dir: &Path) -> String {
    dir.to_string_lossy().into_owned()
}

#[test]
fn help_exits_zero() {
    let o = edufl(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("compare"));
}

#[test]
fn unknown_flag_is_a_config_error() {
    assert_eq!(edufl(&["compare", "--bogus"]).status.code(), Some(1));
    assert_eq!(edufl(&["nope"]).status.code(), Some(1));
}

#[test]
fn invalid_mu_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = edufl(&["federated", "--out", &out_arg(tmp.path()), "--mu", "-1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn missing_config_file_fails() {
    let o = edufl(&["compare", "--config", "/nonexistent/edufl.toml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_raw_file_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    fs::write(&cfg, "[data]\npath = \"/nonexistent/raw.csv\"\n").unwrap();
    let o = edufl(&["preprocess", "--config", &out_arg(&cfg), "--out", &out_arg(tmp.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/raw.csv"));
}

#[test]
fn too_many_clients_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = edufl(&["federated", "--out", &out_arg(tmp.path()), "--clients", "51"]);
    assert_eq!(o.status.code(), Some(2), "{o:?}");
}

#[test]
fn compare_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    let o = edufl(&["compare", "--out", &out_arg(tmp.path()), "--rounds", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("RQ3"));
    let report = fs::read_to_string(tmp.path().join("report.txt")).unwrap();
    assert!(report.contains("RQ1"));
    assert!(tmp.path().join("comparison.csv").exists());
    let history = fs::read_to_string(tmp.path().join("federated_history.csv")).unwrap();
    assert_eq!(history.lines().count(), 3);
}

#[test]
fn synthesize_then_preprocess_from_file() {
    let tmp = tempfile::tempdir().unwrap();
    let o = edufl(&["synthesize", "--out", &out_arg(tmp.path()), "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let raw = tmp.path().join("synthetic.csv");
    let cfg = tmp.path().join("c.toml");
    fs::write(&cfg, format!("[data]\npath = {:?}\n", raw.to_string_lossy())).unwrap();
    let out = tmp.path().join("p");
    let o = edufl(&["preprocess", "--config", &out_arg(&cfg), "--out", &out_arg(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("encoded width: 54"));
    assert!(out.join("processed.csv").exists());
}
