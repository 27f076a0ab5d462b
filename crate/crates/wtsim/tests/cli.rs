use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn wtsim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wtsim"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const SHORT: &str = r#"
name = "short"
wind = { constant = 12.0 }

[solver]
duration = 0.1
log_interval = 1e-3

[output]
channels = ["p", "q", "v_dc"]
"#;

#[test]
fn validate_accepts_bundled_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["case1", "case2", "case3", "case4", "fault3ph", "faultslg", "region2_mppt", "curtailment"] {
        let out = wtsim(&["validate", name], dir.path());
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn invalid_scenario_exits_with_config_status() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "[solver]\ndt = -1.0\nduration = -2.0\n");
    for cmd in ["validate", "run"] {
        let out = wtsim(&[cmd, &bad], dir.path());
        assert_eq!(out.status.code(), Some(3));
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains("dt") && err.contains("duration"), "{err}");
    }
}

#[test]
fn unreadable_or_malformed_files_exit_with_config_status() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(wtsim(&["validate", "missing.toml"], dir.path()).status.code(), Some(3));
    let junk = write(dir.path(), "junk.toml", "wind = [[[\n");
    assert_eq!(wtsim(&["validate", &junk], dir.path()).status.code(), Some(3));
    let unknown = write(dir.path(), "unknown.toml", "no_such_key = 1\n");
    assert_eq!(wtsim(&["validate", &unknown], dir.path()).status.code(), Some(3));
}

#[test]
fn numerical_blow_up_exits_with_fault_status() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "coarse.toml",
        "name = \"coarse\"\n[solver]\nduration = 0.5\ndt = 5e-3\nlog_interval = 1e-2\n",
    );
    let out = wtsim(&["run", &s, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(4));
    let snapshot = fs::read_to_string(dir.path().join("o/coarse.fault.json")).unwrap();
    serde_json::from_str::<serde_json::Value>(&snapshot).unwrap();
    assert!(!dir.path().join("o/coarse.csv").exists());
}

#[test]
fn run_writes_csv_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "short.toml", SHORT);
    let out = wtsim(&["run", &s, "--out", "o", "--plot"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("o/short.csv")).unwrap();
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("time"), "{header}");
    assert_eq!(header.split(',').count(), 4);
    assert!(csv.lines().any(|l| l.starts_with('#')));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 102);
    for ch in ["p", "q", "v_dc"] {
        let svg = fs::read_to_string(dir.path().join(format!("o/short_plots/{ch}.svg"))).unwrap();
        assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    }
}

#[test]
fn variant_flag_changes_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{SHORT}\n[[events]]\nkind = \"single_line_to_ground\"\nphase = \"a\"\nretained = 0.3\nlocation = \"source\"\nt_start = 0.02\nduration = 0.05\n"
    );
    let s = write(dir.path(), "short.toml", &text);
    for v in ["sequence", "positive-only"] {
        let out = wtsim(&["run", &s, "--out", v, "--variant", v], dir.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = fs::read_to_string(dir.path().join("sequence/short.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("positive-only/short.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn compare_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "short.toml", SHORT);
    assert_eq!(wtsim(&["run", &s, "--out", "a"], dir.path()).status.code(), Some(0));
    assert_eq!(wtsim(&["run", &s, "--out", "b"], dir.path()).status.code(), Some(0));
    let spec = write(dir.path(), "spec.toml", "channels = [\"p\", \"v_dc\"]\nsteady_window = [0.05, 0.1]\n");
    let out = wtsim(&["compare", "a/short.csv", "b/short.csv", "--spec", &spec], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let channels = report["channels"].as_array().unwrap();
    assert_eq!(channels.len(), 2);
    for c in channels {
        assert_eq!(c["steady_delta"].as_f64(), Some(0.0));
    }

    let bad = write(dir.path(), "bad_spec.toml", "steady_windw = [0, 1]\n");
    let out = wtsim(&["compare", "a/short.csv", "b/short.csv", "--spec", &bad], dir.path());
    assert_eq!(out.status.code(), Some(3));
}
