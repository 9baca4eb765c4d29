use std::fs;
use std::path::Path;

use emergent_comm::experiment::cli::run_cli;
use emergent_comm::experiment::{load_config, Snapshot};

const CONFIG: &str = "duration = 40.0\ncadence = 10.0\n\n[society]\nN = 4\nM = 5\nS = 3\nalpha = 0.2\nlambda = 0.05\nC = 0.6\nA = 0.9\nseed = 3\n";

fn cli(args: &[&str]) -> String {
    let mut buf = Vec::new();
    run_cli(std::iter::once("emergent-comm").chain(args.iter().copied()), &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("exp.toml");
    fs::write(&path, CONFIG).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn simulate_writes_every_output() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path());
    let out = tmp.path().join("run");
    let text = cli(&["simulate", "--config", &config, "--out", out.to_str().unwrap(), "--replicates", "2", "--snapshot", "--jobs", "1"]);
    assert!(text.starts_with("point,gain_window,predicted_gain,regime"), "{text}");

    for f in ["config.resolved.toml", "manifest.json", "aggregate.csv", "gain.svg", "metrics/p000_r000.csv", "metrics/p000_r001.csv", "snapshots/p000_r001.json"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["replicates"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["failed"], 0);

    let metrics = fs::read_to_string(out.join("metrics/p000_r000.csv")).unwrap();
    assert_eq!(metrics.lines().next().unwrap(), "time,p_s,gain,gain_window,variability,dominant_count");
    assert_eq!(metrics.lines().count(), 1 + 5);

    let resolved = load_config(out.join("config.resolved.toml")).unwrap();
    assert_eq!(resolved.replicates, 2);
    assert_eq!(resolved.society.agents, 4);

    let snap = Snapshot::load(out.join("snapshots/p000_r001.json")).unwrap();
    assert_eq!(snap.steps, 160);
}

#[test]
fn worker_count_does_not_change_results() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path());
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    cli(&["sweep", "--config", &config, "--grid", "alpha=0.1,1", "--grid", "C=0.2,0.8", "--out", a.to_str().unwrap(), "--replicates", "4", "--jobs", "1"]);
    cli(&["sweep", "--config", &config, "--grid", "alpha=0.1,1", "--grid", "C=0.2,0.8", "--out", b.to_str().unwrap(), "--replicates", "4", "--jobs", "3"]);
    let agg = fs::read(a.join("aggregate.csv")).unwrap();
    assert_eq!(agg, fs::read(b.join("aggregate.csv")).unwrap());
    assert_eq!(String::from_utf8(agg).unwrap().lines().count(), 1 + 4);
}

#[test]
fn reproduce_honours_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fig6");
    cli(&["reproduce", "fig6", "--duration", "200", "--replicates", "2", "--seed", "11", "--out", out.to_str().unwrap()]);
    let hist = fs::read_to_string(out.join("dominance_histogram.csv")).unwrap();
    assert!(hist.starts_with("point,M,alpha,D,count,empirical,theory"));
    let resolved = load_config(out.join("config.resolved.toml")).unwrap();
    assert_eq!(resolved.duration, 200.0);
    assert!(resolved.points.iter().all(|p| p.seed == 11));
}

#[test]
fn bad_config_is_an_error_not_a_panic() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.toml");
    fs::write(&path, CONFIG.replace("C = 0.6", "C = 2.0")).unwrap();
    let mut buf = Vec::new();
    let err = run_cli(["emergent-comm", "simulate", "--config", path.to_str().unwrap()], &mut buf).unwrap_err();
    assert!(err.to_string().contains("C must lie in [0,1]"), "{err}");
}
