//! Frequency-domain experiment pipeline shared by `run` and `sweep`.
//!
//! Work is organised per frequency bin: the loudspeaker transfers, the
//! desired field and the weighting matrix are built once per bin and shared
//! by every job; transfer-coefficient estimates are cached per microphone
//! set within a bin, so methods and regularisation values that use the same
//! microphones share one estimate.

use std::borrow::Cow;
use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{ExperimentConfig, Method, TransferSpec};
use crate::broadband::{
    design_filters, desired_plane_wave_phasors, evaluate_sdr, ir_to_spectra, render_phasors,
    BroadbandFilterBank, EvaluationReport, FrequencyGrid, Pulse,
};
use crate::error::{Error, Result};
use crate::estimation::{build_kernel, estimate_transfer_expansions};
use crate::linalg::CMatrix;
use crate::reproduction::{
    pressure_matching, weighted_mode_matching, DrivingSignals, FreeFieldTransfers, QuadratureBasis,
    TransferMatrix, TransferModel, WeightingMatrix,
};
use crate::scene::{
    load_dataset, quadrature, subsample_mics, EvaluationGrid, LoudspeakerArray, MicrophoneSet, TargetRegion,
};
use crate::specfun::Wavenumber;
use crate::wavefield::{plane_wave_coeffs, PlaneWave, Vec3};

/// One solver configuration evaluated by the pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Job {
    pub mic_count: usize,
    pub method: Method,
    /// Replaces `η` (pm) or `λ` (wmm, mm) at every bin when set.
    pub regularization: Option<f64>,
}

impl Job {
    pub fn new(mic_count: usize, method: Method) -> Self {
        Self {
            mic_count,
            method,
            regularization: None,
        }
    }
}

enum TransferSource {
    Analytic(FreeFieldTransfers),
    /// `[grid point × loudspeaker]` per active bin.
    Measured(Vec<CMatrix>),
}

/// Everything a run needs that does not depend on the job.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub speakers: LoudspeakerArray,
    pub grid: EvaluationGrid,
    pub region: TargetRegion,
    pub freq: FrequencyGrid,
    pub center: Vec3,
    pub pulse: Pulse,
    pub wave: PlaneWave,
    transfers: TransferSource,
}

/// Result of evaluating one job.
#[derive(Debug, Clone)]
pub struct JobOutcome {
    pub job: Job,
    pub mics: MicrophoneSet,
    pub report: EvaluationReport,
    pub filters: BroadbandFilterBank,
    pub desired: Vec<Vec<f64>>,
    pub synthesized: Vec<Vec<f64>>,
}

impl Experiment {
    pub fn prepare(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let freq = config.frequency_grid()?;
        let (speakers, grid, region, transfers) = match &config.transfers {
            TransferSpec::AnalyticPointSource { gain } => {
                let g = config.geometry()?;
                let model = FreeFieldTransfers {
                    positions: g.speakers.positions.clone(),
                    gain: *gain,
                };
                (g.speakers, g.grid, g.region, TransferSource::Analytic(model))
            }
            TransferSpec::Dataset { path } => {
                let data = load_dataset(path).map_err(|e| e.in_stage("ingest"))?;
                if (data.sample_rate_hz - freq.sample_rate_hz).abs() > 1e-9 {
                    return Err(Error::config(
                        "params.sample_rate_hz",
                        format!(
                            "dataset is sampled at {} Hz; resample it to {} Hz first",
                            data.sample_rate_hz, freq.sample_rate_hz
                        ),
                    ));
                }
                let (grid, order) = EvaluationGrid::from_positions(&data.rcv_positions)?;
                let region = TargetRegion::from_grid(&grid);
                let spectra = ir_to_spectra(&data, &freq).map_err(|e| e.in_stage("ingest"))?;
                let mats = spectra
                    .into_iter()
                    .map(|t: TransferMatrix| t.g.select_rows(order.iter()))
                    .collect();
                let speakers = LoudspeakerArray::new(data.src_positions.clone());
                (speakers, grid, region, TransferSource::Measured(mats))
            }
        };
        if speakers.is_empty() {
            return Err(Error::config("geometry", "zero sources"));
        }
        if grid.nx < 2 || grid.ny < 2 {
            return Err(Error::config("geometry.grid", "need at least 2 points per axis"));
        }
        let center = grid.centroid();
        Ok(Self {
            config: config.clone(),
            speakers,
            grid,
            region,
            freq,
            center,
            pulse: Pulse {
                cutoff_hz: config.params.band_limit_hz,
            },
            wave: PlaneWave::new(config.source.theta, config.source.phi, Complex64::new(1.0, 0.0)),
            transfers,
        })
    }

    fn wavenumber(&self, bin: usize) -> Result<Wavenumber> {
        Wavenumber::from_frequency(self.freq.frequency(bin), self.config.params.sound_speed)
    }

    /// Transfers from every loudspeaker to every grid point at active bin `i`.
    fn transfer_matrix(&self, i: usize, k: Wavenumber) -> Cow<'_, CMatrix> {
        match &self.transfers {
            TransferSource::Analytic(model) => Cow::Owned(model.matrix(&self.grid.points, k)),
            TransferSource::Measured(mats) => Cow::Borrowed(&mats[i]),
        }
    }

    pub fn microphones(&self, count: usize) -> Result<MicrophoneSet> {
        subsample_mics(&self.grid, count)
    }

    /// Per-bin driving signals for every job, `out[job][bin]`.
    pub fn solve(&self, jobs: &[Job]) -> Result<Vec<Vec<DrivingSignals>>> {
        let p = &self.config.params;
        let bins = self.freq.active_bins();
        let mut mic_sets: HashMap<usize, MicrophoneSet> = HashMap::new();
        for job in jobs {
            if !mic_sets.contains_key(&job.mic_count) {
                mic_sets.insert(job.mic_count, self.microphones(job.mic_count)?);
            }
        }
        let needs_w = jobs
            .iter()
            .any(|j| j.method == Method::Wmm && !self.config.force_identity_weighting);
        let basis = if needs_w {
            let quad = quadrature(&self.region)?;
            Some(QuadratureBasis::new(&quad, p.n_tr, self.center)?)
        } else {
            None
        };
        let eta = self.config.eta_schedule();
        let lambda = self.config.lambda_schedule();

        let per_bin: Vec<Vec<DrivingSignals>> = bins
            .par_iter()
            .enumerate()
            .map(|(i, &bin)| -> Result<Vec<DrivingSignals>> {
                let f = self.freq.frequency(bin);
                let k = self.wavenumber(bin)?;
                let g_all = self.transfer_matrix(i, k);
                let u_all: Vec<Complex64> = self
                    .grid
                    .points
                    .iter()
                    .map(|r| self.wave.value(r, &self.center, k))
                    .collect();
                let w = match &basis {
                    Some(b) => Some(b.weighting_matrix(k).map_err(|e| e.in_stage("weighting"))?),
                    None => None,
                };
                let identity = WeightingMatrix::identity(p.n_tr);
                let mut b_coeffs: Option<DVector<Complex64>> = None;
                let mut c_cache: HashMap<usize, CMatrix> = HashMap::new();
                let mut out = Vec::with_capacity(jobs.len());
                for job in jobs {
                    let mics = &mic_sets[&job.mic_count];
                    let idx = mics.grid_indices.as_ref().expect("grid subsample");
                    let d = match job.method {
                        Method::Pm => {
                            let g = TransferMatrix::new(g_all.select_rows(idx.iter()), f)?;
                            let u = DVector::from_iterator(idx.len(), idx.iter().map(|&n| u_all[n]));
                            let reg = job.regularization.unwrap_or_else(|| eta.at(f));
                            pressure_matching(&g, &u, reg).map_err(|e| e.in_stage("pressure matching"))?
                        }
                        Method::Wmm | Method::Mm => {
                            if b_coeffs.is_none() {
                                b_coeffs = Some(plane_wave_coeffs(&self.wave, self.center, p.n_tr, k)?.coeffs);
                            }
                            if !c_cache.contains_key(&job.mic_count) {
                                let obs = g_all.select_rows(idx.iter());
                                let kernel =
                                    build_kernel(mics, k, p.xi, 0).map_err(|e| e.in_stage("estimation"))?;
                                let c = estimate_transfer_expansions(&obs, &kernel, self.center, p.n_tr)
                                    .map_err(|e| e.in_stage("estimation"))?;
                                c_cache.insert(job.mic_count, c);
                            }
                            let weighting = match (&w, job.method) {
                                (Some(w), Method::Wmm) => w,
                                _ => &identity,
                            };
                            let reg = job.regularization.unwrap_or_else(|| lambda.at(f));
                            weighted_mode_matching(
                                &c_cache[&job.mic_count],
                                b_coeffs.as_ref().expect("set above"),
                                weighting,
                                reg,
                            )
                            .map_err(|e| e.in_stage("mode matching"))?
                        }
                    };
                    out.push(d);
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;

        let mut by_job: Vec<Vec<DrivingSignals>> = (0..jobs.len()).map(|_| Vec::with_capacity(bins.len())).collect();
        for bin in per_bin {
            for (slot, d) in by_job.iter_mut().zip(bin) {
                slot.push(d);
            }
        }
        Ok(by_job)
    }

    /// Desired-field phasors at every grid point and active bin.
    pub fn desired_phasors(&self) -> Vec<Vec<Complex64>> {
        desired_plane_wave_phasors(
            &self.wave,
            &self.pulse,
            &self.freq,
            &self.grid.points,
            &self.center,
            self.config.params.sound_speed,
        )
    }

    /// Synthesised phasors at every grid point, through the DFT of the taps.
    pub fn synthesized_phasors(&self, filters: &BroadbandFilterBank) -> Result<Vec<Vec<Complex64>>> {
        let bins = self.freq.active_bins();
        let spectra = filters.spectra(&self.freq)?;
        let per_bin: Vec<DVector<Complex64>> = bins
            .par_iter()
            .enumerate()
            .map(|(i, &bin)| -> Result<DVector<Complex64>> {
                let k = self.wavenumber(bin)?;
                let g = self.transfer_matrix(i, k);
                let d = DVector::from_iterator(
                    spectra.len(),
                    spectra.iter().map(|h| h[bin].conj() * self.freq.latency_factor(bin)),
                );
                let p = self.pulse.magnitude(self.freq.frequency(bin));
                Ok(g.as_ref() * d * Complex64::new(p, 0.0))
            })
            .collect::<Result<_>>()?;
        let mut out = vec![Vec::with_capacity(bins.len()); self.grid.len()];
        for u in per_bin {
            for (slot, v) in out.iter_mut().zip(u.iter()) {
                slot.push(*v);
            }
        }
        Ok(out)
    }

    /// Filter design, rendering and SDR for one job.
    pub fn evaluate(&self, job: Job, driving: &[DrivingSignals], desired: &[Vec<f64>]) -> Result<JobOutcome> {
        let mics = self.microphones(job.mic_count)?;
        let filters = design_filters(driving, &self.freq, self.config.params.filter_window)
            .map_err(|e| e.in_stage("filter design"))?;
        let synthesized = render_phasors(&self.synthesized_phasors(&filters)?, &self.freq);
        let mut mask = vec![false; self.grid.len()];
        for &i in mics.grid_indices.as_ref().expect("grid subsample") {
            mask[i] = true;
        }
        let report = evaluate_sdr(&synthesized, desired, &mask).map_err(|e| e.in_stage("evaluate"))?;
        Ok(JobOutcome {
            job,
            mics,
            report,
            filters,
            desired: desired.to_vec(),
            synthesized,
        })
    }

    /// Solves and evaluates every job.
    pub fn run_jobs(&self, jobs: &[Job]) -> Result<Vec<JobOutcome>> {
        let driving = self.solve(jobs)?;
        let desired = render_phasors(&self.desired_phasors(), &self.freq);
        jobs.iter()
            .zip(&driving)
            .map(|(job, d)| self.evaluate(*job, d, &desired))
            .collect()
    }
}

/// Free-field impulse response `gain · δ(t − r/c) / (4π r)` of length
/// `ir_length`, band-limited and circular over `fft_length`.
pub fn free_field_ir(distance: f64, gain: f64, sound_speed: f64, grid: &FrequencyGrid, ir_length: usize) -> Vec<f64> {
    let n = grid.fft_length;
    let tau = distance / sound_speed;
    let amp = gain / (4.0 * PI * distance);
    let half: Vec<Complex64> = (0..=n / 2)
        .map(|b| {
            let v = Complex64::from_polar(amp, -2.0 * PI * grid.frequency(b) * tau);
            if b == n / 2 {
                Complex64::new(v.re, 0.0)
            } else {
                v
            }
        })
        .collect();
    let (mut ir, _) = crate::broadband::real_ifft(&half, n);
    ir.truncate(ir_length);
    ir
}
