use std::path::Path;
use std::process::{Command, Output};

use rulefit::dataset::read_rows;
use rulefit::EnsembleModel;

fn rulefit(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rulefit"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run rulefit")
}

fn synth(dir: &Path) {
    let out = rulefit(
        &["gen-synth", "--kind", "discrete", "--n-rows", "300", "--n-cols", "8", "--seed", "4", "--out", "d.csv"],
        dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn column(path: &Path) -> Vec<f64> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.parse().unwrap())
        .collect()
}

#[test]
fn no_arguments_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = rulefit(&[], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn version_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = rulefit(&["--version"], dir.path());
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "rulefit 0.1.0");
}

#[test]
fn fit_then_predict_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d);
    let fit = rulefit(
        &["fit", "--data", "d.csv", "--target", "y", "--trees", "40", "--cv", "3", "--out", "m.json"],
        d,
    );
    assert!(fit.status.success(), "{}", String::from_utf8_lossy(&fit.stderr));
    let pred = rulefit(&["predict", "--model", "m.json", "--data", "d.csv", "--out", "p.csv"], d);
    assert!(pred.status.success(), "{}", String::from_utf8_lossy(&pred.stderr));

    let model = EnsembleModel::load(d.join("m.json")).unwrap();
    let (rows, _) = read_rows(d.join("d.csv"), &model.variables, None).unwrap();
    let cli = column(&d.join("p.csv"));
    assert_eq!(cli.len(), rows.len());
    for (x, p) in rows.iter().zip(&cli) {
        assert!((model.predict(x).unwrap() - p).abs() <= 1e-10);
    }
}

#[test]
fn outputs_carry_a_provenance_header() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let text = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("# rulefit"), "{first}");
    assert!(text.contains("seed: 4"));
}

#[test]
fn invalid_settings_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d);
    let out = rulefit(&["fit", "--data", "d.csv", "--target", "y", "--nu", "2", "--out", "m.json"], d);
    assert_eq!(out.status.code(), Some(2));
    let out = rulefit(&["fit", "--data", "d.csv", "--out", "m.json"], d);
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(d.join("bad.toml"), "target = \"y\"\nshrinkage = 0.1\n").unwrap();
    let out = rulefit(&["fit", "--data", "d.csv", "--preset", "bad.toml", "--out", "m.json"], d);
    assert_eq!(out.status.code(), Some(2));
    assert!(!d.join("m.json").exists());
}

#[test]
fn runtime_failures_exit_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = rulefit(&["predict", "--model", "absent.json", "--data", "absent.csv", "--out", "p.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn preset_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d);
    std::fs::write(d.join("p.toml"), "target = \"y\"\ntrees = 30\ncv = 3\nloss = \"huber\"\nseed = 9\n").unwrap();
    let out = rulefit(
        &["fit", "--data", "d.csv", "--preset", "p.toml", "--seed", "5", "--out", "m.json"],
        d,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let model = EnsembleModel::load(d.join("m.json")).unwrap();
    assert_eq!(model.seed, 5);
    assert_eq!(model.config.ensemble.n_trees, 30);
    assert_eq!(model.target.as_deref(), Some("y"));
}

#[test]
fn interpretation_commands_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d);
    let fit = rulefit(
        &["fit", "--data", "d.csv", "--target", "y", "--trees", "40", "--cv", "3", "--out", "m.json"],
        d,
    );
    assert!(fit.status.success());
    for args in [
        &["importance", "--model", "m.json", "--out", "i.csv"][..],
        &["importance", "--model", "m.json", "--data", "d.csv", "--region", "bottom:0.2", "--out", "r.csv"],
        &["pdp", "--model", "m.json", "--data", "d.csv", "--vars", "x1,x2", "--out", "pd.csv"],
        &["interactions", "--model", "m.json", "--data", "d.csv", "--order", "1", "--out", "h.csv"],
    ] {
        let out = rulefit(args, d);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let h = std::fs::read_to_string(d.join("h.csv")).unwrap();
    assert!(h.contains("tuple,H,null_mean,null_std,excess"));
    let out = rulefit(&["pdp", "--model", "m.json", "--data", "d.csv", "--vars", "zz", "--out", "pd.csv"], d);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn default_fit_is_thread_count_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d);
    for (threads, out) in [("1", "a.json"), ("3", "b.json")] {
        let res = rulefit(
            &["--threads", threads, "fit", "--data", "d.csv", "--target", "y", "--out", out],
            d,
        );
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    }
    let a = std::fs::read_to_string(d.join("a.json")).unwrap();
    let b = std::fs::read_to_string(d.join("b.json")).unwrap();
    assert_eq!(a, b);
    let model = EnsembleModel::from_json(&a).unwrap();
    let e = &model.config.ensemble;
    assert_eq!((e.nu, e.lbar, e.n_trees), (0.01, 4.0, 333));
}
