//! Frequency grid, impulse-response transforms, FIR filter design, pulse
//! rendering and SDR evaluation.
//!
//! DFT spectra use `X[k] = Σ x[n] e^{-j2πkn/N}`, so a delay `τ` appears as
//! `e^{-jωτ}`. The physical phasors elsewhere in the crate carry `e^{-iωt}`
//! time dependence, which makes a DFT spectrum the complex conjugate of the
//! phasor. Conversions happen in this module only.
//!
//! Filters are centred by half their length, so every rendered signal
//! carries `fft_length / 2` samples of latency; desired signals are rendered
//! with the same latency. All rendering is circular over `fft_length`.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::reproduction::{DrivingSignals, TransferMatrix};
use crate::scene::MeasuredDataset;
use crate::wavefield::{PlaneWave, Vec3};

/// SDR reported when the reproduction error vanishes.
pub const SDR_CAP_DB: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    pub sample_rate_hz: f64,
    pub fft_length: usize,
    pub band_limit_hz: f64,
}

impl FrequencyGrid {
    pub fn new(sample_rate_hz: f64, fft_length: usize, band_limit_hz: f64) -> Result<Self> {
        if !(sample_rate_hz > 0.0) || !sample_rate_hz.is_finite() {
            return Err(Error::config("sample_rate_hz", "must be positive"));
        }
        if fft_length < 4 || !fft_length.is_power_of_two() {
            return Err(Error::config("fft_length", "must be a power of two and at least 4"));
        }
        if !(band_limit_hz > 0.0) {
            return Err(Error::config("band_limit_hz", "must be positive"));
        }
        Ok(Self {
            sample_rate_hz,
            fft_length,
            band_limit_hz,
        })
    }

    pub fn frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.sample_rate_hz / self.fft_length as f64
    }

    /// Bins `1..` up to the band limit, never including DC or Nyquist.
    pub fn active_bins(&self) -> Vec<usize> {
        let top = (self.band_limit_hz * self.fft_length as f64 / self.sample_rate_hz).floor() as usize;
        (1..=top.min(self.fft_length / 2 - 1)).collect()
    }

    pub fn latency_samples(&self) -> usize {
        self.fft_length / 2
    }

    /// DFT factor of the `fft_length / 2` centering delay, `(-1)^bin`.
    pub fn latency_factor(&self, bin: usize) -> f64 {
        if bin % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// One-sided DFT (`fft_length/2 + 1` bins) of a zero-padded impulse response.
pub fn ir_spectrum(ir: &[f64], grid: &FrequencyGrid) -> Result<Vec<Complex64>> {
    if ir.len() > grid.fft_length {
        return Err(Error::config(
            "fft_length",
            format!("impulse response length {} exceeds fft length {}", ir.len(), grid.fft_length),
        ));
    }
    let mut buf: Vec<Complex64> = ir.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    buf.resize(grid.fft_length, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(grid.fft_length).process(&mut buf);
    buf.truncate(grid.fft_length / 2 + 1);
    Ok(buf)
}

/// Inverse of [`ir_spectrum`] for a real signal: fills the negative
/// frequencies by Hermitian symmetry and returns the real part together with
/// the largest discarded imaginary magnitude.
pub fn real_ifft(half: &[Complex64], fft_length: usize) -> (Vec<f64>, f64) {
    let mut buf = vec![Complex64::new(0.0, 0.0); fft_length];
    let h = fft_length / 2;
    for (k, v) in half.iter().enumerate().take(h + 1) {
        buf[k] = *v;
    }
    buf[0].im = 0.0;
    buf[h].im = 0.0;
    for k in 1..h {
        buf[fft_length - k] = buf[k].conj();
    }
    FftPlanner::new().plan_fft_inverse(fft_length).process(&mut buf);
    let scale = 1.0 / fft_length as f64;
    let mut residue: f64 = 0.0;
    let out = buf
        .iter()
        .map(|v| {
            residue = residue.max((v.im * scale).abs());
            v.re * scale
        })
        .collect();
    (out, residue)
}

/// Physical-convention transfer matrices `[receivers × sources]` at every
/// active bin of `grid`, from the dataset impulse responses.
pub fn ir_to_spectra(dataset: &MeasuredDataset, grid: &FrequencyGrid) -> Result<Vec<TransferMatrix>> {
    if dataset.samples > grid.fft_length {
        return Err(Error::config(
            "fft_length",
            format!(
                "impulse response length {} exceeds fft length {}",
                dataset.samples, grid.fft_length
            ),
        ));
    }
    let bins = grid.active_bins();
    let (ns, nr) = (dataset.sources(), dataset.receivers());
    let mut mats = vec![CMatrix::zeros(nr, ns); bins.len()];
    let fft = FftPlanner::new().plan_fft_forward(grid.fft_length);
    let mut buf = vec![Complex64::new(0.0, 0.0); grid.fft_length];
    for s in 0..ns {
        for r in 0..nr {
            buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            for (slot, v) in buf.iter_mut().zip(dataset.ir(s, r)) {
                slot.re = *v as f64;
            }
            fft.process(&mut buf);
            for (i, &b) in bins.iter().enumerate() {
                mats[i][(r, s)] = buf[b].conj();
            }
        }
    }
    mats.into_iter()
        .zip(&bins)
        .map(|(g, &b)| TransferMatrix::new(g, grid.frequency(b)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FilterWindow {
    #[default]
    None,
    Hann,
}

/// Real FIR taps `[L × filter_length]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BroadbandFilterBank {
    pub taps: Vec<Vec<f64>>,
    /// Largest imaginary residue of the inverse transforms relative to the
    /// largest tap magnitude.
    pub imag_residue: f64,
}

impl BroadbandFilterBank {
    pub fn speakers(&self) -> usize {
        self.taps.len()
    }

    pub fn filter_length(&self) -> usize {
        self.taps.first().map_or(0, Vec::len)
    }

    /// One-sided DFT of every filter.
    pub fn spectra(&self, grid: &FrequencyGrid) -> Result<Vec<Vec<Complex64>>> {
        self.taps.iter().map(|t| ir_spectrum(t, grid)).collect()
    }
}

/// FIR filters from per-bin driving signals (`driving[i]` belongs to
/// `grid.active_bins()[i]`); bins outside the band are zero.
pub fn design_filters(
    driving: &[DrivingSignals],
    grid: &FrequencyGrid,
    window: FilterWindow,
) -> Result<BroadbandFilterBank> {
    let bins = grid.active_bins();
    if driving.len() != bins.len() {
        return Err(Error::Dimension {
            what: "driving signals per active bin",
            expected: bins.len(),
            found: driving.len(),
        });
    }
    let speakers = driving.first().map_or(0, DrivingSignals::len);
    if driving.iter().any(|d| d.len() != speakers) {
        return Err(Error::config("driving", "inconsistent loudspeaker count across bins"));
    }
    let n = grid.fft_length;
    let hann: Vec<f64> = (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()).collect();
    let mut taps = Vec::with_capacity(speakers);
    let mut residue: f64 = 0.0;
    let mut peak: f64 = 0.0;
    for l in 0..speakers {
        let mut half = vec![Complex64::new(0.0, 0.0); n / 2 + 1];
        for (d, &b) in driving.iter().zip(&bins) {
            half[b] = d.d[l].conj();
        }
        let (mut h, r) = real_ifft(&half, n);
        residue = residue.max(r);
        h.rotate_right(n / 2);
        if window == FilterWindow::Hann {
            for (v, w) in h.iter_mut().zip(&hann) {
                *v *= w;
            }
        }
        if !h.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("filter taps"));
        }
        peak = peak.max(h.iter().fold(0.0, |a, v| a.max(v.abs())));
        taps.push(h);
    }
    Ok(BroadbandFilterBank {
        taps,
        imag_residue: if peak > 0.0 { residue / peak } else { 0.0 },
    })
}

/// Band-limited source pulse: zero-phase magnitude
/// `1 / sqrt(1 + (f/f_c)^16)` on `(0, f_c]`, exactly zero at DC and above `f_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub cutoff_hz: f64,
}

impl Pulse {
    pub fn magnitude(&self, f: f64) -> f64 {
        if f <= 0.0 || f > self.cutoff_hz {
            return 0.0;
        }
        1.0 / (1.0 + (f / self.cutoff_hz).powi(16)).sqrt()
    }

    /// Reference signal with the pipeline latency applied.
    pub fn signal(&self, grid: &FrequencyGrid) -> Vec<f64> {
        let half: Vec<Complex64> = (0..=grid.fft_length / 2)
            .map(|b| Complex64::new(self.magnitude(grid.frequency(b)) * grid.latency_factor(b), 0.0))
            .collect();
        real_ifft(&half, grid.fft_length).0
    }
}

/// Renders per-point physical phasors at the active bins into time series:
/// `x_p = IFFT(conj(U_p) · latency)`.
pub fn render_phasors(phasors: &[Vec<Complex64>], grid: &FrequencyGrid) -> Vec<Vec<f64>> {
    let bins = grid.active_bins();
    phasors
        .iter()
        .map(|u| {
            let mut half = vec![Complex64::new(0.0, 0.0); grid.fft_length / 2 + 1];
            for (v, &b) in u.iter().zip(&bins) {
                half[b] = v.conj() * grid.latency_factor(b);
            }
            real_ifft(&half, grid.fft_length).0
        })
        .collect()
}

/// Physical phasors of the pulse-driven plane wave at every point and
/// active bin, phase-referenced at `reference`.
pub fn desired_plane_wave_phasors(
    wave: &PlaneWave,
    pulse: &Pulse,
    grid: &FrequencyGrid,
    points: &[Vec3],
    reference: &Vec3,
    sound_speed: f64,
) -> Vec<Vec<Complex64>> {
    let bins = grid.active_bins();
    let n = wave.propagation();
    points
        .iter()
        .map(|p| {
            let delay = n.dot(&(p - reference)) / sound_speed;
            bins.iter()
                .map(|&b| {
                    let f = grid.frequency(b);
                    wave.amplitude * Complex64::from_polar(pulse.magnitude(f), 2.0 * PI * f * delay)
                })
                .collect()
        })
        .collect()
}

/// Time series of the desired plane-wave field, with pipeline latency.
pub fn desired_plane_wave_signal(
    wave: &PlaneWave,
    pulse: &Pulse,
    grid: &FrequencyGrid,
    points: &[Vec3],
    reference: &Vec3,
    sound_speed: f64,
) -> Vec<Vec<f64>> {
    render_phasors(
        &desired_plane_wave_phasors(wave, pulse, grid, points, reference, sound_speed),
        grid,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub sdr_db: f64,
    /// Time-averaged square error at every point, masked or not.
    pub error_map: Vec<f64>,
    /// `true` for points excluded from the SDR.
    pub mask: Vec<bool>,
}

fn ratio_db(signal: f64, error: f64) -> Result<f64> {
    if !(signal > 0.0) {
        return Err(Error::UndefinedSdr);
    }
    if error == 0.0 {
        return Ok(SDR_CAP_DB);
    }
    Ok((10.0 * (signal / error).log10()).min(SDR_CAP_DB))
}

/// `SDR = 10 log10(Σ|u_des|² / Σ|u_syn − u_des|²)` over unmasked points and
/// all samples.
pub fn evaluate_sdr(synthesized: &[Vec<f64>], desired: &[Vec<f64>], mask: &[bool]) -> Result<EvaluationReport> {
    if synthesized.len() != desired.len() || mask.len() != desired.len() {
        return Err(Error::Dimension {
            what: "evaluation points",
            expected: desired.len(),
            found: synthesized.len().min(mask.len()),
        });
    }
    let mut signal = 0.0;
    let mut error = 0.0;
    let mut error_map = Vec::with_capacity(desired.len());
    for ((syn, des), &masked) in synthesized.iter().zip(desired).zip(mask) {
        if syn.len() != des.len() {
            return Err(Error::Dimension {
                what: "samples per point",
                expected: des.len(),
                found: syn.len(),
            });
        }
        let e: f64 = syn.iter().zip(des).map(|(a, b)| (a - b) * (a - b)).sum();
        let s: f64 = des.iter().map(|v| v * v).sum();
        error_map.push(e / des.len().max(1) as f64);
        if !masked {
            signal += s;
            error += e;
        }
    }
    Ok(EvaluationReport {
        sdr_db: ratio_db(signal, error)?,
        error_map,
        mask: mask.to_vec(),
    })
}

/// Frequency-domain SDR over the active bins (per-point phasor lists as in
/// [`render_phasors`]). Agrees with [`evaluate_sdr`] on the rendered signals
/// by Parseval's theorem.
pub fn sdr_from_phasors(synthesized: &[Vec<Complex64>], desired: &[Vec<Complex64>], mask: &[bool]) -> Result<f64> {
    let mut signal = 0.0;
    let mut error = 0.0;
    for ((syn, des), &masked) in synthesized.iter().zip(desired).zip(mask) {
        if masked {
            continue;
        }
        for (a, b) in syn.iter().zip(des) {
            signal += b.norm_sqr();
            error += (a - b).norm_sqr();
        }
    }
    ratio_db(signal, error)
}

/// A parameter that is constant over frequency apart from explicit bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandOverride {
    pub from_hz: f64,
    pub to_hz: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularizationSchedule {
    pub default: f64,
    pub overrides: Vec<BandOverride>,
}

impl RegularizationSchedule {
    pub fn constant(value: f64) -> Self {
        Self {
            default: value,
            overrides: Vec::new(),
        }
    }

    /// Value at `f`; the last matching override wins.
    pub fn at(&self, f: f64) -> f64 {
        self.overrides
            .iter()
            .rev()
            .find(|o| f >= o.from_hz && f <= o.to_hz)
            .map_or(self.default, |o| o.value)
    }
}

/// Synthesised phasors at `points` from already designed filters, using the
/// DFT of the taps so windowing and band limits are honoured:
/// `U_p = Σ_l conj(H_l · latency) · G_{p,l} · P`, returned in the physical
/// convention with the latency removed.
pub fn synthesized_phasors(
    filters: &BroadbandFilterBank,
    transfers: &[CMatrix],
    pulse: &Pulse,
    grid: &FrequencyGrid,
) -> Result<Vec<Vec<Complex64>>> {
    let bins = grid.active_bins();
    if transfers.len() != bins.len() {
        return Err(Error::Dimension {
            what: "transfer matrices per active bin",
            expected: bins.len(),
            found: transfers.len(),
        });
    }
    let spectra = filters.spectra(grid)?;
    let points = transfers.first().map_or(0, |g| g.nrows());
    let mut out = vec![Vec::with_capacity(bins.len()); points];
    for (i, &b) in bins.iter().enumerate() {
        let g = &transfers[i];
        let d = DVector::from_iterator(
            spectra.len(),
            spectra.iter().map(|h| h[b].conj() * grid.latency_factor(b)),
        );
        let u = g * d;
        let p = pulse.magnitude(grid.frequency(b));
        for (slot, v) in out.iter_mut().zip(u.iter()) {
            slot.push(v * p);
        }
    }
    Ok(out)
}
