//! Experiment configuration files (JSON).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::broadband::{BandOverride, FilterWindow, FrequencyGrid, RegularizationSchedule};
use crate::error::{Error, Result};
use crate::scene::{paper_geometry, EvaluationGrid, LoudspeakerArray, TargetRegion};
use crate::specfun::{MAX_ORDER, SOUND_SPEED};
use crate::wavefield::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Pressure matching at the microphone positions.
    Pm,
    /// Weighted mode matching with estimated transfer coefficients.
    Wmm,
    /// Mode matching (`W = I`).
    Mm,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Pm => "pm",
            Method::Wmm => "wmm",
            Method::Mm => "mm",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pm" => Ok(Method::Pm),
            "wmm" => Ok(Method::Wmm),
            "mm" => Ok(Method::Mm),
            other => Err(Error::config("method", format!("unknown method `{other}` (pm, wmm, mm)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometrySpec {
    /// `"paper"`: the built-in desk-scale layout.
    Preset(String),
    Custom(CustomGeometry),
}

impl Default for GeometrySpec {
    fn default() -> Self {
        GeometrySpec::Preset("paper".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomGeometry {
    pub speakers: Vec<[f64; 3]>,
    pub grid: GridSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x: [f64; 2],
    pub y: [f64; 2],
    #[serde(default)]
    pub z: f64,
    pub spacing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TransferSpec {
    /// Free-field monopoles with amplitude `gain / (4π r)`.
    AnalyticPointSource {
        #[serde(default = "one")]
        gain: f64,
    },
    /// A dataset directory in the scene format.
    Dataset { path: PathBuf },
}

fn one() -> f64 {
    1.0
}

impl Default for TransferSpec {
    fn default() -> Self {
        TransferSpec::AnalyticPointSource { gain: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Parameters {
    pub eta: f64,
    pub lambda: f64,
    pub xi: f64,
    pub n_tr: usize,
    pub band_limit_hz: f64,
    pub fft_length: usize,
    pub sample_rate_hz: f64,
    pub sound_speed: f64,
    pub filter_window: FilterWindow,
    pub eta_overrides: Vec<BandOverride>,
    pub lambda_overrides: Vec<BandOverride>,
    /// Length of simulated impulse responses; defaults to `fft_length`.
    pub ir_length: Option<usize>,
    /// Time of the field snapshot written by `run`, in seconds.
    pub snapshot_time_s: f64,
}

impl Default for Parameters {
    fn default() -> Self {
        Self {
            eta: 1e2,
            lambda: 1.0,
            xi: 1e-3,
            n_tr: 12,
            band_limit_hz: 700.0,
            fft_length: 8192,
            sample_rate_hz: 8000.0,
            sound_speed: SOUND_SPEED,
            filter_window: FilterWindow::None,
            eta_overrides: Vec::new(),
            lambda_overrides: Vec::new(),
            ir_length: None,
            snapshot_time_s: 0.51,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    /// Arrival direction of the desired plane wave.
    pub theta: f64,
    pub phi: f64,
}

impl Default for SourceSpec {
    fn default() -> Self {
        Self {
            theta: std::f64::consts::FRAC_PI_2,
            phi: std::f64::consts::FRAC_PI_4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub mic_counts: Vec<usize>,
    pub methods: Vec<Method>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            mic_counts: vec![9, 16, 25, 36],
            methods: vec![Method::Pm, Method::Wmm],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub geometry: GeometrySpec,
    pub transfers: TransferSpec,
    pub mics: usize,
    pub method: Method,
    pub params: Parameters,
    pub source: SourceSpec,
    pub sweep: SweepSpec,
    /// Replace the weighting matrix by the identity in `wmm` runs.
    pub force_identity_weighting: bool,
    pub output_dir: PathBuf,
    /// Recorded in run manifests; the pipeline itself is deterministic.
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            geometry: GeometrySpec::default(),
            transfers: TransferSpec::default(),
            mics: 16,
            method: Method::Wmm,
            params: Parameters::default(),
            source: SourceSpec::default(),
            sweep: SweepSpec::default(),
            force_identity_weighting: false,
            output_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

/// Resolved scene geometry.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub speakers: LoudspeakerArray,
    pub grid: EvaluationGrid,
    pub region: TargetRegion,
}

fn positive(value: f64, field: &str) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::config(field, "must be a positive finite number"));
    }
    Ok(())
}

fn non_negative(value: f64, field: &str) -> Result<()> {
    if !(value >= 0.0) || !value.is_finite() {
        return Err(Error::config(field, "must be a finite non-negative number"));
    }
    Ok(())
}

fn check_overrides(list: &[BandOverride], field: &str) -> Result<()> {
    for (i, o) in list.iter().enumerate() {
        let f = format!("{field}[{i}]");
        non_negative(o.value, &format!("{f}.value"))?;
        if !(o.from_hz <= o.to_hz) {
            return Err(Error::config(f, "from_hz must not exceed to_hz"));
        }
    }
    Ok(())
}

impl ExperimentConfig {
    /// The built-in `paper` preset with all defaults.
    pub fn paper() -> Self {
        Self::default()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        // dataset paths are relative to the config file
        if let TransferSpec::Dataset { path: data } = &mut cfg.transfers {
            if data.is_relative() {
                if let Some(parent) = path.parent() {
                    *data = parent.join(&*data);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        non_negative(p.eta, "params.eta")?;
        non_negative(p.lambda, "params.lambda")?;
        non_negative(p.xi, "params.xi")?;
        positive(p.band_limit_hz, "params.band_limit_hz")?;
        positive(p.sample_rate_hz, "params.sample_rate_hz")?;
        positive(p.sound_speed, "params.sound_speed")?;
        non_negative(p.snapshot_time_s, "params.snapshot_time_s")?;
        if p.n_tr > MAX_ORDER {
            return Err(Error::config("params.n_tr", format!("must not exceed {MAX_ORDER}")));
        }
        if p.fft_length < 4 || !p.fft_length.is_power_of_two() {
            return Err(Error::config("params.fft_length", "must be a power of two and at least 4"));
        }
        if let Some(len) = p.ir_length {
            if len == 0 || len > p.fft_length {
                return Err(Error::config("params.ir_length", "must be in 1..=fft_length"));
            }
        }
        check_overrides(&p.eta_overrides, "params.eta_overrides")?;
        check_overrides(&p.lambda_overrides, "params.lambda_overrides")?;
        if let TransferSpec::AnalyticPointSource { gain } = self.transfers {
            positive(gain, "transfers.analytic_point_source.gain")?;
        }
        if self.mics == 0 {
            return Err(Error::config("mics", "must be positive"));
        }
        match &self.geometry {
            GeometrySpec::Preset(name) if name == "paper" => {}
            GeometrySpec::Preset(name) => {
                return Err(Error::config("geometry.preset", format!("unknown preset `{name}`")))
            }
            GeometrySpec::Custom(c) => {
                if c.speakers.is_empty() {
                    return Err(Error::config("geometry.custom.speakers", "zero sources"));
                }
                if c.speakers.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::config("geometry.custom.speakers", "non-finite coordinate"));
                }
                positive(c.grid.spacing, "geometry.custom.grid.spacing")?;
            }
        }
        for (i, m) in self.sweep.mic_counts.iter().enumerate() {
            let side = m.isqrt();
            if *m == 0 || side * side != *m {
                return Err(Error::config(format!("sweep.mic_counts[{i}]"), format!("{m} is not a positive perfect square")));
            }
        }
        Ok(())
    }

    /// Geometry from the config alone (dataset runs take positions from the
    /// dataset instead).
    pub fn geometry(&self) -> Result<Geometry> {
        match &self.geometry {
            GeometrySpec::Preset(_) => {
                let g = paper_geometry();
                Ok(Geometry {
                    speakers: g.speakers,
                    grid: g.grid,
                    region: g.region,
                })
            }
            GeometrySpec::Custom(c) => {
                if c.speakers.is_empty() {
                    return Err(Error::config("geometry.custom.speakers", "zero sources"));
                }
                let grid = EvaluationGrid::regular(
                    (c.grid.x[0], c.grid.x[1]),
                    (c.grid.y[0], c.grid.y[1]),
                    c.grid.z,
                    c.grid.spacing,
                )
                .map_err(|e| match e {
                    Error::Config { message, .. } => Error::config("geometry.custom.grid", message),
                    other => other,
                })?;
                let speakers = LoudspeakerArray::new(c.speakers.iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect());
                // degenerate grids are fine for simulate; run and sweep reject them
                let region = TargetRegion::from_grid(&grid);
                for (i, s) in speakers.positions.iter().enumerate() {
                    if region.contains(s) {
                        return Err(Error::config(
                            format!("geometry.custom.speakers[{i}]"),
                            "loudspeaker lies inside the target region",
                        ));
                    }
                }
                Ok(Geometry { speakers, grid, region })
            }
        }
    }

    pub fn frequency_grid(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::new(self.params.sample_rate_hz, self.params.fft_length, self.params.band_limit_hz)
    }

    pub fn eta_schedule(&self) -> RegularizationSchedule {
        RegularizationSchedule {
            default: self.params.eta,
            overrides: self.params.eta_overrides.clone(),
        }
    }

    pub fn lambda_schedule(&self) -> RegularizationSchedule {
        RegularizationSchedule {
            default: self.params.lambda,
            overrides: self.params.lambda_overrides.clone(),
        }
    }

    /// Canonical JSON: keys sorted, so the hash ignores key order in the file.
    pub fn canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string(&value).expect("value serializes")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}
