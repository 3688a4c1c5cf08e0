//! End-to-end checks of the `lab` binary.

use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = lab(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn run_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&["run", "--policies", "lab,ideal,random", "--seeds", "1,2", "--horizon", "15", "--jobs", "2", "--out", p(out)]);
    }
    for f in ["lab.csv", "ideal.csv", "random.csv", "lab.summary.json", "manifest.json"] {
        let x = std::fs::read(a.join(f)).unwrap();
        let y = std::fs::read(b.join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
    let csv = std::fs::read_to_string(a.join("lab.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# manifest "));
    assert!(lines.next().unwrap().starts_with("seed,t,policy,a_1,"));
    assert_eq!(lines.count(), 30);
}

#[test]
fn timing_fills_decision_column() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["run", "--policy", "delaymin", "--seed", "3", "--horizon", "4", "--timing", "--out", p(dir.path())]);
    let csv = std::fs::read_to_string(dir.path().join("delaymin.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    assert!(!last.ends_with(','), "{last}");
}

#[test]
fn tradeoff_figure_from_weight_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let res = dir.path().join("results");
    ok(&["bench", "--policies", "lab", "--seeds", "1,2", "--horizon", "8", "--sweep", "weight=0,0.5,1,2,3", "--out", p(&res)]);
    let figs = dir.path().join("figs");
    ok(&["figures", "--results", p(&res), "--figure", "tradeoff", "--out", p(&figs)]);
    let text = std::fs::read_to_string(figs.join("tradeoff.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# manifest "));
    assert_eq!(lines.next().unwrap(), "x,series,y,stderr");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5 * 4);
    assert!(rows.iter().any(|r| r.starts_with("3,latency,")));
}

#[test]
fn scale_figure_has_rows_per_device_count() {
    let dir = tempfile::tempdir().unwrap();
    let res = dir.path().join("results");
    ok(&["bench", "--policies", "delaymin,random", "--seeds", "1", "--horizon", "3", "--sweep", "devices=1-7", "--out", p(&res)]);
    let figs = dir.path().join("figs");
    ok(&["figures", "--results", p(&res), "--figure", "scale", "--out", p(&figs)]);
    let text = std::fs::read_to_string(figs.join("scale.csv")).unwrap();
    let utility: Vec<&str> = text.lines().filter(|l| l.contains(",random:utility,")).collect();
    assert_eq!(utility.len(), 7);
}

#[test]
fn figures_on_empty_results_fail_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let res = dir.path().join("results");
    std::fs::create_dir(&res).unwrap();
    let figs = dir.path().join("figs");
    let out = lab(&["figures", "--results", p(&res), "--out", p(&figs)]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("absent") && err.contains("weight"), "{err}");
    assert!(!figs.exists());
}

#[test]
fn missing_sweep_is_listed_and_nothing_written() {
    let dir = tempfile::tempdir().unwrap();
    let res = dir.path().join("results");
    ok(&["bench", "--policies", "lab", "--seeds", "1", "--horizon", "3", "--sweep", "weight=0,0.5,1,2,3", "--out", p(&res)]);
    let figs = dir.path().join("figs");
    let out = lab(&["figures", "--results", p(&res), "--figure", "tradeoff", "--figure", "pathloss", "--out", p(&figs)]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("pathloss"), "{err}");
    assert!(!figs.join("tradeoff.csv").exists());
}

#[test]
fn mixed_configurations_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let res = dir.path().join("results");
    ok(&["bench", "--policies", "ideal,delaymin", "--seeds", "1", "--horizon", "3", "--out", p(&res.join("one"))]);
    ok(&["bench", "--policies", "ideal,delaymin", "--seeds", "1", "--horizon", "4", "--out", p(&res.join("two"))]);
    let out = lab(&["figures", "--results", p(&res), "--figure", "optgap", "--out", p(&dir.path().join("figs"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("different configurations"));
}

#[test]
fn optgap_figure_is_zero_for_ideal_against_itself_shape() {
    let dir = tempfile::tempdir().unwrap();
    let res = dir.path().join("results");
    ok(&["bench", "--policies", "ideal,delayobli", "--seeds", "1,2", "--horizon", "6", "--out", p(&res)]);
    let figs = dir.path().join("figs");
    ok(&["figures", "--results", p(&res), "--figure", "optgap", "--out", p(&figs)]);
    let text = std::fs::read_to_string(figs.join("optgap.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(2)
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            assert_eq!(c[1], "delayobli");
            vec![c[0].parse().unwrap(), c[2].parse().unwrap()]
        })
        .collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r[1] >= -1e-12));
}

#[test]
fn config_file_is_applied_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, "[system]\nn_devices = 2\nn_levels = 3\nhorizon = 5\n").unwrap();
    ok(&["run", "--config", p(&cfg), "--policy", "ideal", "--out", p(&dir.path().join("r"))]);
    let csv = std::fs::read_to_string(dir.path().join("r/ideal.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains("a_2") && !csv.contains("a_3"));
    assert_eq!(csv.lines().count(), 2 + 5);

    std::fs::write(&cfg, "[system]\nn_devices = 0\n").unwrap();
    let out = lab(&["run", "--config", p(&cfg), "--out", p(&dir.path().join("bad"))]);
    assert!(!out.status.success());
    std::fs::write(&cfg, "[system]\nbogus = 1\n").unwrap();
    let out = lab(&["run", "--config", p(&cfg), "--out", p(&dir.path().join("bad"))]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

#[test]
fn bandwidth_command() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.txt");
    std::fs::write(&inst, "bandwidth_hz = 5e6\nnoise_psd_dbm_per_hz = -174\nd,h,p,w\n1e6,2e-9,0.1,1\n1e6,2e-9,0.1,1\n").unwrap();
    let json: serde_json::Value = serde_json::from_str(&ok(&["bandwidth", "--instance", p(&inst)])).unwrap();
    let b: Vec<f64> = serde_json::from_value(json["b"].clone()).unwrap();
    assert!((b[0] - 0.5).abs() < 1e-9 && (b[1] - 0.5).abs() < 1e-9);
    assert!(json["oracle_objective_delta"].as_f64().unwrap() <= 1e-6);

    let mut rows = String::from("bandwidth_hz = 5e6\nnoise_psd_w_per_hz = 4e-21\nd,h,p,w\n");
    for (d, h, w) in [(5.5e7, 1e-9, 1.0), (1.4e7, 3e-10, 2.0), (3.5e6, 8e-9, 0.5), (8.6e5, 2e-10, 1.5), (1.4e7, 5e-9, 3.0)] {
        rows.push_str(&format!("{d},{h},0.1,{w}\n"));
    }
    std::fs::write(&inst, rows).unwrap();
    let report = dir.path().join("report.json");
    let json: serde_json::Value = serde_json::from_str(&ok(&["bandwidth", "--instance", p(&inst), "--out", p(&report)])).unwrap();
    assert!(json["oracle_objective_delta"].as_f64().unwrap() <= 1e-6);
    assert!(json["oracle_b_delta"].as_f64().unwrap() <= 1e-6);
    assert!(report.exists());

    std::fs::write(&inst, "bandwidth_hz = 5e6\nnoise_psd_w_per_hz = 4e-21\nd,h,p,w\n1e6,x,0.1,1\n").unwrap();
    let out = lab(&["bandwidth", "--instance", p(&inst)]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
}

#[test]
fn selftest_quick_passes() {
    let out = ok(&["selftest", "--quick"]);
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 4, "{out}");
}
