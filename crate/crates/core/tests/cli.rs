use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qthermo::scan::config_echo;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn qthermo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qthermo")).args(args).output().expect("binary runs")
}

fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn scan_writes_the_documented_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig6.csv");
    let cfg = configs().join("fig6.toml");
    let o = qthermo(&["scan", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    let lines = data_lines(&csv);
    assert_eq!(lines[0], "beta,eta,t,qfi,purity,negativity");
    assert_eq!(lines.len(), 1 + 3 * 6 * 400);
    assert!(csv.starts_with("# qthermo "));
}

#[test]
fn identical_runs_are_byte_identical_and_the_echo_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("mu_sweep.toml");
    let (a, b, c) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("c.csv"));
    for (path, threads) in [(&a, "1"), (&b, "3")] {
        let o = qthermo(&["scan", "--config", cfg.to_str().unwrap(), "--out", path.to_str().unwrap(), "--threads", threads]);
        assert!(o.status.success());
    }
    let first = fs::read(&a).unwrap();
    assert_eq!(first, fs::read(&b).unwrap());

    let echo = dir.path().join("echo.toml");
    fs::write(&echo, config_echo(&String::from_utf8(first.clone()).unwrap()).unwrap()).unwrap();
    let o = qthermo(&["scan", "--config", echo.to_str().unwrap(), "--out", c.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(first, fs::read(&c).unwrap());
}

#[test]
fn overrides_replace_config_values() {
    let cfg = configs().join("fig6.toml");
    let o = qthermo(&["scan", "--config", cfg.to_str().unwrap(), "--beta", "0.7", "--n", "3", "--t", "0.25"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = String::from_utf8(o.stdout).unwrap();
    let lines = data_lines(&csv);
    assert_eq!(lines.len(), 1 + 6);
    assert!(lines[1..].iter().all(|l| l.starts_with("0.7,") && l.contains(",0.25,")));
    assert!(csv.contains("#   n_qubits = 3"));
}

#[test]
fn diff_runs_both_modes() {
    for name in ["peak_vs_mu", "squeezed_vs_productized"] {
        let cfg = configs().join(format!("{name}.toml"));
        let o = qthermo(&["diff", "--config", cfg.to_str().unwrap()]);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        let csv = String::from_utf8(o.stdout).unwrap();
        assert!(data_lines(&csv)[0].ends_with("difference") || data_lines(&csv)[0].ends_with("has_transient_peak"));
    }
    let cfg = configs().join("fig6.toml");
    let o = qthermo(&["diff", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scaling_writes_a_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    fs::write(
        &cfg,
        "n_max = 3\n[bath]\nbeta = 0.5\n[time]\npoints = 60\n[[states]]\nfamily = \"ground\"\n[[states]]\nfamily = \"ghz\"\n",
    )
    .unwrap();
    let out = dir.path().join("s.json");
    let o = qthermo(&["scaling", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let fits = v["fits"].as_array().unwrap();
    assert_eq!(fits.len(), 2);
    assert_eq!(fits[0]["label"], "ground");
    assert!(fits[0]["slope_stderr"].is_null());
    assert_eq!(fits[1]["n"].as_array().unwrap().len(), 2);
    assert!(fits[1]["slope"].as_f64().unwrap() > 0.0);
}

#[test]
fn bound_reports_norms_and_value() {
    let o = qthermo(&["bound", "--beta", "0.5", "--gamma", "1", "--t", "0.1", "--n", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let m1 = v["m1_norm"].as_f64().unwrap();
    assert!(v["m2_norm"].as_f64().unwrap() <= 1e-12);
    assert!((v["bound_value"].as_f64().unwrap() - 16.0 * m1).abs() <= 1e-12 * m1);
    assert_eq!(v["m1"].as_array().unwrap().len(), 2);
}

#[test]
fn selftest_exits_zero() {
    let o = qthermo(&["selftest"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().count() >= 10);
    assert!(text.lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[bath]\nbeta = [0.5]\n[state]\nfamily = \"identity_mixture\"\neta = 1.5\nn_qubits = 2\n").unwrap();
    let o = qthermo(&["scan", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("eta"));

    let missing = dir.path().join("missing.toml");
    assert_eq!(qthermo(&["scan", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(qthermo(&["scan"]).status.code(), Some(2));
    assert_eq!(qthermo(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(qthermo(&["bound", "--beta", "-1", "--t", "0.1"]).status.code(), Some(2));
}

#[test]
fn numeric_errors_exit_three() {
    // p rounds to 1 at this time, so the Kraus derivatives are singular.
    let o = qthermo(&["bound", "--beta", "0.5", "--t", "1000"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}
