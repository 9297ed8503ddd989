//! The `simulate`, `run`, `sweep` and `inspect` verbs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ExperimentConfig, Method, TransferSpec};
use super::manifest::{unix_now, ArtifactWriter, RunManifest};
use super::pipeline::{free_field_ir, Experiment, Job, JobOutcome};
use crate::error::{Error, Result};
use crate::scene::{load_dataset, write_dataset, DatasetManifest, MeasuredDataset};

/// Scalars of one evaluated job, as written to `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub method: String,
    pub mic_count: usize,
    pub sdr_db: f64,
    pub config_hash: String,
    pub transfers: String,
    pub points: usize,
    pub masked_points: Vec<usize>,
    pub active_bins: usize,
    pub band_limit_hz: f64,
    pub eta: f64,
    pub lambda: f64,
    pub xi: f64,
    pub n_tr: usize,
    pub identity_weighting: bool,
    pub max_filter_imag_residue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub mic_count: usize,
    pub method: String,
    pub sdr_db: f64,
}

#[derive(Debug)]
pub struct RunOutput {
    pub report: RunReport,
    pub outcome: JobOutcome,
    pub manifest: RunManifest,
}

fn csv_field<T: std::fmt::Display>(v: T) -> String {
    v.to_string()
}

/// Writes simulated free-field impulse responses for the configured geometry
/// into `out` in the dataset format.
pub fn cmd_simulate(config: &ExperimentConfig, out: &Path) -> Result<PathBuf> {
    let started = unix_now();
    config.validate()?;
    let gain = match config.transfers {
        TransferSpec::AnalyticPointSource { gain } => gain,
        TransferSpec::Dataset { .. } => {
            return Err(Error::config("transfers", "simulate needs analytic_point_source transfers"))
        }
    };
    let geometry = config.geometry()?;
    let freq = config.frequency_grid()?;
    let ir_length = config.params.ir_length.unwrap_or(freq.fft_length);
    let c = config.params.sound_speed;
    let mut irs = Vec::with_capacity(geometry.speakers.len() * geometry.grid.len() * ir_length);
    for s in &geometry.speakers.positions {
        for r in &geometry.grid.points {
            let d = (r - s).norm();
            if d == 0.0 {
                return Err(Error::config("geometry", "a receiver coincides with a loudspeaker"));
            }
            irs.extend(free_field_ir(d, gain, c, &freq, ir_length).into_iter().map(|v| v as f32));
        }
    }
    let dataset = MeasuredDataset::new(
        geometry.speakers.positions.clone(),
        geometry.grid.points.clone(),
        ir_length,
        freq.sample_rate_hz,
        irs,
    )?;
    let mut writer = ArtifactWriter::create(out)?;
    for path in write_dataset(out, &dataset)? {
        writer.record_path(&path);
    }
    writer.finish("simulate", config.hash(), config.seed, started)?;
    Ok(out.to_path_buf())
}

fn report_for(config: &ExperimentConfig, exp: &Experiment, outcome: &JobOutcome) -> RunReport {
    let masked: Vec<usize> = outcome
        .report
        .mask
        .iter()
        .enumerate()
        .filter_map(|(i, m)| m.then_some(i))
        .collect();
    RunReport {
        method: outcome.job.method.name().to_string(),
        mic_count: outcome.job.mic_count,
        sdr_db: outcome.report.sdr_db,
        config_hash: config.hash(),
        transfers: match config.transfers {
            TransferSpec::AnalyticPointSource { .. } => "analytic_point_source".into(),
            TransferSpec::Dataset { .. } => "dataset".into(),
        },
        points: outcome.report.error_map.len(),
        masked_points: masked,
        active_bins: exp.freq.active_bins().len(),
        band_limit_hz: config.params.band_limit_hz,
        eta: config.params.eta,
        lambda: config.params.lambda,
        xi: config.params.xi,
        n_tr: config.params.n_tr,
        identity_weighting: outcome.job.method == Method::Mm
            || (outcome.job.method == Method::Wmm && config.force_identity_weighting),
        max_filter_imag_residue: outcome.filters.imag_residue,
    }
}

fn grid_csv(exp: &Experiment, values: &[f64], mask: Option<&[bool]>) -> String {
    let mut s = String::from(if mask.is_some() { "x,y,value,masked\n" } else { "x,y,value\n" });
    for (i, (p, v)) in exp.grid.points.iter().zip(values).enumerate() {
        let _ = write!(s, "{},{},{}", csv_field(p.x), csv_field(p.y), csv_field(v));
        if let Some(m) = mask {
            let _ = write!(s, ",{}", u8::from(m[i]));
        }
        s.push('\n');
    }
    s
}

/// Runs the configured method and writes `report.json`, `error_map.csv`,
/// `snapshot_desired.csv`, `snapshot_synthesized.csv`, `filters.bin`
/// (little-endian `f32`, loudspeaker-major), `config.json` and the manifest.
pub fn cmd_run(config: &ExperimentConfig, out: &Path) -> Result<RunOutput> {
    let started = unix_now();
    let exp = Experiment::prepare(config)?;
    let job = Job::new(config.mics, config.method);
    let outcome = exp.run_jobs(&[job])?.pop().expect("one job");
    let report = report_for(config, &exp, &outcome);

    let mut writer = ArtifactWriter::create(out)?;
    writer.write("config.json", serde_json::to_string_pretty(config).expect("config serializes") + "\n")?;
    writer.write("report.json", serde_json::to_string_pretty(&report).expect("report serializes") + "\n")?;
    writer.write(
        "error_map.csv",
        grid_csv(&exp, &outcome.report.error_map, Some(&outcome.report.mask)),
    )?;
    let t = ((config.params.snapshot_time_s * exp.freq.sample_rate_hz).round() as usize).min(exp.freq.fft_length - 1);
    let snap = |signals: &[Vec<f64>]| -> Vec<f64> { signals.iter().map(|s| s[t]).collect() };
    writer.write("snapshot_desired.csv", grid_csv(&exp, &snap(&outcome.desired), None))?;
    writer.write("snapshot_synthesized.csv", grid_csv(&exp, &snap(&outcome.synthesized), None))?;
    let mut bytes = Vec::with_capacity(outcome.filters.speakers() * outcome.filters.filter_length() * 4);
    for taps in &outcome.filters.taps {
        for v in taps {
            bytes.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    writer.write("filters.bin", bytes)?;
    let manifest = writer.finish("run", config.hash(), config.seed, started)?;
    Ok(RunOutput {
        report,
        outcome,
        manifest,
    })
}

/// Evaluates every `(mic count, method)` pair of `config.sweep` and writes
/// `sweep.csv` with columns `mic_count,method,sdr_db`.
pub fn cmd_sweep(config: &ExperimentConfig, out: &Path) -> Result<Vec<SweepRow>> {
    let started = unix_now();
    if config.sweep.mic_counts.is_empty() {
        return Err(Error::config("sweep.mic_counts", "empty list"));
    }
    if config.sweep.methods.is_empty() {
        return Err(Error::config("sweep.methods", "empty list"));
    }
    let exp = Experiment::prepare(config)?;
    let jobs: Vec<Job> = config
        .sweep
        .mic_counts
        .iter()
        .flat_map(|&m| config.sweep.methods.iter().map(move |&method| Job::new(m, method)))
        .collect();
    let outcomes = exp.run_jobs(&jobs)?;
    let rows: Vec<SweepRow> = outcomes
        .iter()
        .map(|o| SweepRow {
            mic_count: o.job.mic_count,
            method: o.job.method.name().to_string(),
            sdr_db: o.report.sdr_db,
        })
        .collect();
    let mut csv = String::from("mic_count,method,sdr_db\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{},{}", r.mic_count, r.method, r.sdr_db);
    }
    let mut writer = ArtifactWriter::create(out)?;
    writer.write("config.json", serde_json::to_string_pretty(config).expect("config serializes") + "\n")?;
    writer.write("sweep.csv", csv)?;
    writer.finish("sweep", config.hash(), config.seed, started)?;
    Ok(rows)
}

/// Human-readable summary of a config file, dataset directory or run directory.
pub fn cmd_inspect(path: &Path) -> Result<String> {
    let mut s = String::new();
    if path.is_dir() {
        let report = path.join("report.json");
        let sweep = path.join("sweep.csv");
        let dataset = path.join("ir.bin");
        if report.exists() {
            let text = fs::read_to_string(&report).map_err(|e| Error::io(&report, e))?;
            let v: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| Error::ingestion(&report, e.to_string()))?;
            let _ = writeln!(s, "run directory {}", path.display());
            for key in ["method", "mic_count", "sdr_db", "points", "active_bins", "config_hash"] {
                let _ = writeln!(s, "  {key}: {}", v[key]);
            }
        } else if sweep.exists() {
            let text = fs::read_to_string(&sweep).map_err(|e| Error::io(&sweep, e))?;
            let _ = writeln!(s, "sweep directory {}", path.display());
            for line in text.lines() {
                let _ = writeln!(s, "  {line}");
            }
        } else if dataset.exists() {
            let data = load_dataset(path)?;
            let m: DatasetManifest = data.manifest();
            let _ = writeln!(s, "dataset {}", path.display());
            let _ = writeln!(s, "  sources: {}", m.sources);
            let _ = writeln!(s, "  receivers: {}", m.receivers);
            let _ = writeln!(s, "  samples: {}", m.samples);
            let _ = writeln!(s, "  sample_rate_hz: {}", m.sample_rate_hz);
            let peak = data.irs.iter().fold(0.0f32, |a, v| a.max(v.abs()));
            let _ = writeln!(s, "  peak |ir|: {peak}");
        } else {
            return Err(Error::ingestion(path, "not a run, sweep or dataset directory"));
        }
    } else {
        let cfg = ExperimentConfig::load(path)?;
        let freq = cfg.frequency_grid()?;
        let _ = writeln!(s, "config {}", path.display());
        let _ = writeln!(s, "  hash: {}", cfg.hash());
        let _ = writeln!(s, "  method: {}", cfg.method.name());
        let _ = writeln!(s, "  mics: {}", cfg.mics);
        let _ = writeln!(s, "  active bins: {}", freq.active_bins().len());
        if let Ok(g) = cfg.geometry() {
            let _ = writeln!(s, "  loudspeakers: {}", g.speakers.len());
            let _ = writeln!(s, "  evaluation points: {}", g.grid.len());
        }
        let _ = writeln!(s, "  canonical: {}", cfg.canonical_json());
    }
    Ok(s)
}
