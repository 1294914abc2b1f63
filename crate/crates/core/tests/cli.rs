use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn udw(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_udw"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn run_config(sub: &str, name: &str, out: &Path) -> Output {
    let path = config(name);
    udw(&[sub, "--config", path.to_str().unwrap()], out)
}

#[test]
fn diagnose_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config("diagnose", "diagnose_gaussian_massless.json", dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("diagnose.json")).unwrap()).unwrap();
    assert_eq!(json["report"]["classification"], "BoundedBelowNonFock");
    assert!(dir.path().join("diagnose.csv").exists());
}

#[test]
fn dynamics_writes_one_csv_per_channel() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config("dynamics", "dynamics_single_mode.json", dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for ch in ["weyl", "sigma_x", "gamma", "boson_number", "entropy"] {
        let text = fs::read_to_string(dir.path().join(format!("{ch}.csv"))).unwrap();
        // header plus three samples
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4, "{ch}");
    }
}

#[test]
fn thermal_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config("thermal", "thermal_single_mode.json", dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("thermal.csv").exists());
}

#[test]
fn validate_passes_on_canonical_system() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config("validate", "validate_canonical.json", dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("validate.json")).unwrap()).unwrap();
    assert_eq!(json["all_pass"], true);
}

#[test]
fn validate_reports_inadequate_truncation() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config("validate", "validate_truncated.json", dir.path());
    assert_eq!(o.status.code(), Some(2));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("validate.json")).unwrap()).unwrap();
    assert_eq!(json["all_pass"], false);
    let causes: Vec<String> = json["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter_map(|r| r["cause"].as_str().map(String::from))
        .collect();
    assert!(causes.iter().any(|c| c.contains("truncation")), "{causes:?}");
}

#[test]
fn output_is_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let o = run_config("dynamics", "dynamics_single_mode.json", dir.path());
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["dynamics.json", "weyl.csv", "entropy.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let o = udw(
        &["diagnose", "--seedless", "--config", config("diagnose_gaussian_massless.json").to_str().unwrap()],
        a.path(),
    );
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn format_flag_limits_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = config("thermal_single_mode.json");
    let o = udw(&["thermal", "--config", path.to_str().unwrap(), "--format", "json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("thermal.json").exists());
    assert!(!dir.path().join("thermal.csv").exists());
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    };
    let cases = [
        write("bad_json.json", "{ not json"),
        write("unknown_key.json", r#"{"model": {"n": 3, "colour": 1}, "task": {"diagnose": {}}}"#),
        write("negative_beta.json", r#"{"model": {"modes": {"omegas": [1.0], "couplings": [0.3]}}, "task": {"thermal": {"betas": [-1.0], "g": {"kind": "discrete", "values": [1.0]}}}}"#),
        dir.path().join("missing.json"),
    ];
    let out = dir.path().join("out");
    for p in &cases {
        let o = udw(&["diagnose", "--config", p.to_str().unwrap()], &out);
        assert_eq!(o.status.code(), Some(1), "{}", p.display());
        assert!(!o.stderr.is_empty());
    }
    // Subcommand must match the task in the file.
    let o = run_config("thermal", "diagnose_gaussian_massless.json", &out);
    assert_eq!(o.status.code(), Some(1));
}
