use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use nlgreen::config::ExperimentConfig;

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_nlgreen")).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn sidecar(path: &Path) -> BTreeMap<String, String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| {
            let (k, v) = l.split_once(": ").expect("key: value");
            (k.to_string(), v.to_string())
        })
        .collect()
}

fn number(map: &BTreeMap<String, String>, key: &str) -> f64 {
    map[key].parse().unwrap_or_else(|_| panic!("{key} = {}", map[key]))
}

#[test]
fn green_reports_kdv_strength_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs_dir().join("kdv_green.toml");
    run_ok(&["green", "--config", config.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    let side = sidecar(&dir.path().join("kernel.txt"));
    assert!((number(&side, "weak_form_d1") + 0.5).abs() < 0.005);
    assert_eq!(side["order"], "1");
    let kernel = fs::read_to_string(dir.path().join("kernel.csv")).unwrap();
    assert!(kernel.starts_with("t,G,G_d1\n") && !kernel.contains('\r'));
    let manifest = ExperimentConfig::load(&dir.path().join("manifest.toml")).unwrap();
    assert_eq!(manifest, ExperimentConfig::load(&config).unwrap());
}

#[test]
fn green_reports_both_boussinesq_candidates() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs_dir().join("boussinesq_green.toml");
    run_ok(&["green", "--config", config.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    let side = sidecar(&dir.path().join("kernel.txt"));
    for key in ["kernel_ratio_to_half_jump", "kernel_ratio_to_jump", "weak_form_strength"] {
        assert!(number(&side, key).is_finite(), "{key}");
    }
}

#[test]
fn solve_is_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let config = configs_dir().join("boussinesq_sin.toml");
    for d in [&a, &b] {
        run_ok(&["solve", "--config", config.to_str().unwrap(), "--out", d.path().to_str().unwrap(), "--seedless"]);
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.iter().any(|n| n == "er2_N1_N2.csv"));
    for name in names {
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap(), "{name:?}");
    }
    let side = sidecar(&a.path().join("fit.txt"));
    assert!(number(&side, "dominance_N1_N2") <= 0.2);
}

#[test]
fn zero_source_writes_zero_solutions() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("zero.toml");
    fs::write(&config, "[source]\nkind = \"zero\"\n[grid]\nhorizon = 1.0\n[expansion]\nn_values = [1, 2]\n").unwrap();
    let out = dir.path().join("out");
    run_ok(&["solve", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    for name in ["reference.csv", "solution_N1.csv", "solution_N2.csv"] {
        let text = fs::read_to_string(out.join(name)).unwrap();
        assert!(text.lines().skip(1).all(|l| l.ends_with(",0")), "{name}");
    }
}

#[test]
fn table1_defaults_without_config() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["table1", "--out", dir.path().to_str().unwrap()]);
    let text = fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,max_er1,min_er1");
    let ns: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ns, ["1", "2", "4"]);
    let side = sidecar(&dir.path().join("table1.txt"));
    assert_eq!(side["fit_window"], "[0, 0.77]");
    assert_eq!(side["report_window"], "[0, 1.1]");
}

#[test]
fn sweep_writes_one_row_per_value_and_order() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs_dir().join("sweep_kdv_speed.toml");
    run_ok(&["sweep", "--config", config.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(text.starts_with("c,N,max_er1,min_er1,fit_residual,usable_horizon\n"));
    assert_eq!(text.lines().count(), 1 + 5 * 3);
    assert_eq!(sidecar(&dir.path().join("sweep.txt"))["failures"], "0");
}

#[test]
fn invalid_config_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(&config, "[grid]\ndt = -1.0\n").unwrap();
    let out = run(&["solve", "--config", config.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.dt"));
}
