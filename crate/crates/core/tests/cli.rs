use std::fs;
use std::path::Path;
use std::process::Command;

use soundfield::cli::{cmd_inspect, cmd_run, cmd_simulate, cmd_sweep, ExperimentConfig, Method, RunManifest, TransferSpec};
use soundfield::scene::load_dataset;
use soundfield::ErrorKind;

fn fast_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::paper();
    cfg.params.fft_length = 1024;
    cfg.params.snapshot_time_s = 0.06;
    cfg
}

fn single_pair() -> ExperimentConfig {
    ExperimentConfig::from_json(
        r#"{
            "geometry": {"custom": {"speakers": [[0.0, 0.0, 0.0]], "grid": {"x": [1.0, 1.0], "y": [0.0, 0.0], "spacing": 0.05}}},
            "params": {"fft_length": 1024}
        }"#,
    )
    .unwrap()
}

#[test]
fn simulated_ir_peaks_at_the_propagation_delay() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = single_pair();
    cmd_simulate(&cfg, dir.path()).unwrap();
    let ds = load_dataset(dir.path()).unwrap();
    assert_eq!((ds.sources(), ds.receivers(), ds.samples), (1, 1, 1024));
    let ir = ds.ir(0, 0);
    let peak = ir.iter().enumerate().fold((0, 0.0f32), |a, (i, v)| if v.abs() > a.1 { (i, v.abs()) } else { a });
    assert_eq!(peak.0, (8000.0f64 / 343.0).round() as usize);

    let err = cmd_run(&cfg, dir.path()).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Config);
}

#[test]
fn zero_sources_is_a_config_error() {
    let err = ExperimentConfig::from_json(
        r#"{"geometry": {"custom": {"speakers": [], "grid": {"x": [0.0, 1.0], "y": [0.0, 1.0], "spacing": 0.5}}}}"#,
    )
    .unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Config);
    assert!(err.to_string().contains("geometry.custom.speakers"), "{err}");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let err = ExperimentConfig::from_json(r#"{"params": {"etta": 3.0}}"#).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Config);
    assert!(ExperimentConfig::from_json(r#"{"colour": 1}"#).is_err());
}

#[test]
fn paper_preset_dataset_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = fast_config();
    cfg.params.ir_length = Some(64);
    cmd_simulate(&cfg, dir.path()).unwrap();
    let ds = load_dataset(dir.path()).unwrap();
    assert_eq!((ds.sources(), ds.receivers(), ds.samples), (32, 441, 64));
    let summary = cmd_inspect(dir.path()).unwrap();
    assert!(summary.contains("receivers: 441"), "{summary}");
}

#[test]
fn run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = fast_config();
    cfg.method = Method::Pm;
    let out = cmd_run(&cfg, dir.path()).unwrap();
    assert_eq!(out.report.points, 441);
    assert_eq!(out.report.masked_points.len(), 16);
    assert!(out.report.sdr_db.is_finite());
    let map = fs::read_to_string(dir.path().join("error_map.csv")).unwrap();
    assert_eq!(map.lines().count(), 442);
    assert_eq!(map.lines().filter(|l| l.ends_with(",1")).count(), 16);
    let filters = fs::metadata(dir.path().join("filters.bin")).unwrap().len();
    assert_eq!(filters, 32 * 1024 * 4);

    let manifest: RunManifest =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.command, "run");
    assert_eq!(manifest.config_hash, cfg.hash());
    for name in [
        "config.json",
        "report.json",
        "error_map.csv",
        "snapshot_desired.csv",
        "snapshot_synthesized.csv",
        "filters.bin",
        "run_manifest.json",
    ] {
        assert!(manifest.artifacts.iter().any(|a| a == name), "{name} missing");
        assert!(dir.path().join(name).exists());
    }
    assert!(manifest.finished_unix >= manifest.started_unix);
    assert!(cmd_inspect(dir.path()).unwrap().contains("mic_count: 16"));
}

#[test]
fn identity_weighting_equals_mode_matching() {
    let mut cfg = fast_config();
    cfg.method = Method::Wmm;
    cfg.force_identity_weighting = true;
    let a = cmd_run(&cfg, tempfile::tempdir().unwrap().path()).unwrap();
    cfg.method = Method::Mm;
    cfg.force_identity_weighting = false;
    let b = cmd_run(&cfg, tempfile::tempdir().unwrap().path()).unwrap();
    assert_eq!(a.outcome.filters.taps, b.outcome.filters.taps);
    assert_eq!(a.report.sdr_db.to_bits(), b.report.sdr_db.to_bits());
}

#[test]
fn identical_runs_give_identical_reports() {
    let cfg = fast_config();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    cmd_run(&cfg, a.path()).unwrap();
    cmd_run(&cfg, b.path()).unwrap();
    for name in ["report.json", "error_map.csv", "filters.bin", "config.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn sweep_covers_every_pair() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fast_config();
    let rows = cmd_sweep(&cfg, dir.path()).unwrap();
    assert_eq!(rows.len(), 8);
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("mic_count,method,sdr_db"));
    assert_eq!(csv.lines().count(), 9);

    let mut empty = fast_config();
    empty.sweep.mic_counts.clear();
    assert_eq!(cmd_sweep(&empty, dir.path()).unwrap_err().kind(), ErrorKind::Config);
}

#[test]
fn dataset_round_trip_matches_analytic_run() {
    let data = tempfile::tempdir().unwrap();
    let cfg = fast_config();
    cmd_simulate(&cfg, data.path()).unwrap();
    let analytic = cmd_run(&cfg, tempfile::tempdir().unwrap().path()).unwrap();

    let cfg_dir = tempfile::tempdir().unwrap();
    let mut measured = fast_config();
    measured.transfers = TransferSpec::Dataset {
        path: data.path().to_path_buf(),
    };
    let path = cfg_dir.path().join("config.json");
    fs::write(&path, serde_json::to_string(&measured).unwrap()).unwrap();
    let loaded = ExperimentConfig::load(&path).unwrap();
    let run = cmd_run(&loaded, tempfile::tempdir().unwrap().path()).unwrap();
    assert!((run.report.sdr_db - analytic.report.sdr_db).abs() < 1e-3, "{} vs {}", run.report.sdr_db, analytic.report.sdr_db);
    assert_eq!(run.report.transfers, "dataset");
}

#[test]
fn corrupt_dataset_is_a_data_error() {
    let data = tempfile::tempdir().unwrap();
    let mut cfg = single_pair();
    cfg.params.ir_length = Some(16);
    cmd_simulate(&cfg, data.path()).unwrap();
    let ir = data.path().join("ir.bin");
    let bytes = fs::read(&ir).unwrap();
    fs::write(&ir, &bytes[..bytes.len() - 4]).unwrap();
    let err = load_dataset(data.path()).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Data);
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_soundfield"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"params": {"eta": -1}}"#);
    let status = bin().args(["run", "--config"]).arg(&bad).status().unwrap();
    assert_eq!(status.code(), Some(2));

    let status = bin().arg("inspect").arg(dir.path().join("missing.json")).status().unwrap();
    assert_eq!(status.code(), Some(3));

    let good = write(dir.path(), "good.json", r#"{"params": {"fft_length": 1024}, "mics": 9, "method": "pm"}"#);
    let out = dir.path().join("run");
    let status = bin().args(["run", "--config"]).arg(&good).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let report = fs::read_to_string(out.join("report.json")).unwrap();
    assert!(report.contains("\"mic_count\": 9"));

    let status = bin().args(["run", "--method", "xyz"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}
