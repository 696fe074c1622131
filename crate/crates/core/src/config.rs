//! Declarative run configuration (TOML).
//!
//! Every section and key is optional; omitted values fall back to the
//! reference hardware: a 32 × 32 panel of 0.02 m pitch at 3.5 GHz, an ideal
//! detector, a broadside BS and one user at (0°, 30°).

use std::path::PathBuf;

use serde::Deserialize;
use thiserror::Error;

use crate::experiments::{
    reference_bs_locations, reference_showcase_samples, ExperimentConfig, PolicyKind, ShowcaseSample,
};
use crate::geometry::{AngularLocation, ArrayGeometry, Position};
use crate::localization::{LocalizerConfig, PeakSearch, Sector};
use crate::wavefield::{DetectorModel, Source};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { path: path.into(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySection {
    pub n_x: usize,
    pub n_z: usize,
    pub d_x_m: f64,
    pub d_z_m: f64,
    pub f_c_hz: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self { n_x: 32, n_z: 32, d_x_m: 0.02, d_z_m: 0.02, f_c_hz: 3.5e9 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorSection {
    pub noise_std: f64,
    pub floor: f64,
    /// Absent means no saturation.
    pub ceiling: Option<f64>,
    pub agc: bool,
    pub phase_jitter_std: f64,
}

impl Default for DetectorSection {
    fn default() -> Self {
        Self { noise_std: 0.0, floor: 0.0, ceiling: None, agc: false, phase_jitter_std: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKindName {
    Far,
    Near,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub kind: SourceKindName,
    pub theta_deg: Option<f64>,
    pub phi_deg: Option<f64>,
    pub x_m: Option<f64>,
    pub y_m: Option<f64>,
    pub z_m: Option<f64>,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default)]
    pub phase_rad: f64,
    #[serde(default)]
    pub frequency_tag: u32,
}

fn one() -> f64 {
    1.0
}

fn far_source(theta_deg: f64, phi_deg: f64) -> SourceSection {
    SourceSection {
        kind: SourceKindName::Far,
        theta_deg: Some(theta_deg),
        phi_deg: Some(phi_deg),
        x_m: None,
        y_m: None,
        z_m: None,
        amplitude: 1.0,
        phase_rad: 0.0,
        frequency_tag: 0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyName {
    Oracle,
    Sector,
    None,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalizationSection {
    pub zero_pad_factor: usize,
    pub dc_guard: usize,
    pub min_peak_to_median: f64,
    pub disambiguation: PolicyName,
    pub sector_theta_deg: [f64; 2],
    pub sector_phi_deg: [f64; 2],
}

impl Default for LocalizationSection {
    fn default() -> Self {
        Self {
            zero_pad_factor: 1,
            dc_guard: 0,
            min_peak_to_median: PeakSearch::default().min_peak_to_median,
            disambiguation: PolicyName::Oracle,
            sector_theta_deg: [-90.0, 90.0],
            sector_phi_deg: [-90.0, 90.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub bs_locations: Vec<[f64; 2]>,
    pub ue_theta_deg: Vec<f64>,
    pub ue_phi_deg: Vec<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            bs_locations: reference_bs_locations().iter().map(|l| [l.theta_deg, l.phi_deg]).collect(),
            ue_theta_deg: vec![0.0, 15.0, -15.0],
            ue_phi_deg: vec![0.0, 15.0, -15.0, 30.0, -30.0, 45.0, -45.0, 60.0, -60.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub bs: [f64; 2],
    pub theta_deg: f64,
    pub phi_deg: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { bs: [0.0, 0.0], theta_deg: 0.0, phi_deg: (-4..=4).map(|k| 15.0 * k as f64).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BerSection {
    pub snr_db: Vec<f64>,
    pub gain_db: f64,
    pub order: u32,
}

impl Default for BerSection {
    fn default() -> Self {
        Self { snr_db: (0..=60).map(|k| -5.0 + 0.5 * k as f64).collect(), gain_db: 15.0, order: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSection {
    pub bs: [f64; 2],
    pub ue: [f64; 2],
    pub bs_range_m: Option<f64>,
    pub ue_range_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShowcaseSection {
    pub samples: Vec<SampleSection>,
}

impl Default for ShowcaseSection {
    fn default() -> Self {
        Self {
            samples: reference_showcase_samples()
                .iter()
                .map(|s| SampleSection {
                    bs: [s.bs.theta_deg, s.bs.phi_deg],
                    ue: [s.ue.theta_deg, s.ue.phi_deg],
                    bs_range_m: s.bs_range_m,
                    ue_range_m: s.ue_range_m,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub seed: u64,
    pub trials: usize,
    pub output_dir: PathBuf,
    pub insertion_loss_db: f64,
    pub ue_amplitude: f64,
    pub grid: GridSection,
    pub sweep: SweepSection,
    pub ber: BerSection,
    pub showcase: ShowcaseSection,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 1,
            output_dir: PathBuf::from("results"),
            insertion_loss_db: 0.0,
            ue_amplitude: 1.0,
            grid: GridSection::default(),
            sweep: SweepSection::default(),
            ber: BerSection::default(),
            showcase: ShowcaseSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geometry: GeometrySection,
    pub detector: DetectorSection,
    pub sources: Vec<SourceSection>,
    pub localization: LocalizationSection,
    pub experiment: ExperimentSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: GeometrySection::default(),
            detector: DetectorSection::default(),
            sources: vec![far_source(0.0, 0.0), far_source(0.0, 30.0)],
            localization: LocalizationSection::default(),
            experiment: ExperimentSection::default(),
        }
    }
}

fn angle(path: &str, v: [f64; 2]) -> Result<AngularLocation, ConfigError> {
    AngularLocation::new(v[0], v[1]).map_err(|e| invalid(path, e.to_string()))
}

fn finite(path: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(path, "must be finite"))
    }
}

impl RunConfig {
    /// Parse and validate.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.array_geometry()?;
        self.detector_model()?;
        self.sources()?;
        self.localizer()?;
        self.policy()?;
        self.experiment_config()?;
        self.showcase_samples()?;
        let b = &self.experiment.ber;
        if ![4, 16, 64].contains(&b.order) {
            return Err(invalid("experiment.ber.order", "must be 4, 16 or 64"));
        }
        finite("experiment.ber.gain_db", b.gain_db)?;
        for (i, s) in b.snr_db.iter().enumerate() {
            finite(&format!("experiment.ber.snr_db[{i}]"), *s)?;
        }
        let s = &self.experiment.sweep;
        angle("experiment.sweep.bs", s.bs)?;
        for (i, p) in s.phi_deg.iter().enumerate() {
            angle(&format!("experiment.sweep.phi_deg[{i}]"), [s.theta_deg, *p])?;
        }
        Ok(())
    }

    pub fn array_geometry(&self) -> Result<ArrayGeometry, ConfigError> {
        let g = &self.geometry;
        if g.n_x < 2 {
            return Err(invalid("geometry.n_x", "must be >= 2"));
        }
        if g.n_z < 2 {
            return Err(invalid("geometry.n_z", "must be >= 2"));
        }
        if !(g.d_x_m > 0.0 && g.d_x_m.is_finite()) {
            return Err(invalid("geometry.d_x_m", "must be finite and > 0"));
        }
        if !(g.d_z_m > 0.0 && g.d_z_m.is_finite()) {
            return Err(invalid("geometry.d_z_m", "must be finite and > 0"));
        }
        if !(g.f_c_hz >= 1.0 && g.f_c_hz < u64::MAX as f64 && g.f_c_hz.fract() == 0.0) {
            return Err(invalid("geometry.f_c_hz", "must be a positive whole number of hertz"));
        }
        ArrayGeometry::new(g.n_z, g.n_x, g.d_z_m, g.d_x_m, g.f_c_hz as u64).map_err(|e| invalid("geometry", e.to_string()))
    }

    pub fn detector_model(&self) -> Result<DetectorModel, ConfigError> {
        let d = &self.detector;
        let check = |path: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(path, "must be finite and >= 0"))
            }
        };
        check("detector.noise_std", d.noise_std)?;
        check("detector.floor", d.floor)?;
        check("detector.phase_jitter_std", d.phase_jitter_std)?;
        let ceiling = match d.ceiling {
            Some(c) if !(c > d.floor && c.is_finite()) => {
                return Err(invalid("detector.ceiling", "must be finite and exceed floor"));
            }
            Some(c) => c,
            None if d.agc => return Err(invalid("detector.agc", "requires detector.ceiling")),
            None => f64::INFINITY,
        };
        Ok(DetectorModel {
            noise_std: d.noise_std,
            floor: d.floor,
            ceiling,
            agc_enabled: d.agc,
            phase_jitter_std: d.phase_jitter_std,
        })
    }

    pub fn sources(&self) -> Result<Vec<Source>, ConfigError> {
        self.sources
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let path = format!("sources[{i}]");
                let src = match s.kind {
                    SourceKindName::Far => {
                        let (Some(t), Some(p)) = (s.theta_deg, s.phi_deg) else {
                            return Err(invalid(&path, "far source needs theta_deg and phi_deg"));
                        };
                        Source::far(angle(&path, [t, p])?, s.amplitude)
                    }
                    SourceKindName::Near => {
                        let (Some(x), Some(y), Some(z)) = (s.x_m, s.y_m, s.z_m) else {
                            return Err(invalid(&path, "near source needs x_m, y_m and z_m"));
                        };
                        Source::near(Position::new(x, y, z), s.amplitude)
                    }
                }
                .map_err(|e| invalid(&path, e.to_string()))?;
                Ok(src.with_phase(finite(&format!("{path}.phase_rad"), s.phase_rad)?).with_tag(s.frequency_tag))
            })
            .collect()
    }

    pub fn localizer(&self) -> Result<LocalizerConfig, ConfigError> {
        let l = &self.localization;
        if l.zero_pad_factor == 0 {
            return Err(invalid("localization.zero_pad_factor", "must be >= 1"));
        }
        if !(l.min_peak_to_median >= 0.0 && l.min_peak_to_median.is_finite()) {
            return Err(invalid("localization.min_peak_to_median", "must be finite and >= 0"));
        }
        Ok(LocalizerConfig {
            zero_pad_factor: l.zero_pad_factor,
            peak: PeakSearch { dc_guard: l.dc_guard, min_peak_to_median: l.min_peak_to_median },
        })
    }

    pub fn sector(&self) -> Result<Sector, ConfigError> {
        let l = &self.localization;
        for (path, r) in [("localization.sector_theta_deg", l.sector_theta_deg), ("localization.sector_phi_deg", l.sector_phi_deg)] {
            if !(r[0] <= r[1]) {
                return Err(invalid(path, "lower bound exceeds upper bound"));
            }
        }
        Ok(Sector {
            theta_deg: (l.sector_theta_deg[0], l.sector_theta_deg[1]),
            phi_deg: (l.sector_phi_deg[0], l.sector_phi_deg[1]),
        })
    }

    pub fn policy(&self) -> Result<PolicyKind, ConfigError> {
        Ok(match self.localization.disambiguation {
            PolicyName::Oracle => PolicyKind::Oracle,
            PolicyName::Sector => PolicyKind::Sector(self.sector()?),
            PolicyName::None => PolicyKind::None,
        })
    }

    /// Grid experiment parameters; the sweep and showcase reuse them with
    /// their own BS placements.
    pub fn experiment_config(&self) -> Result<ExperimentConfig, ConfigError> {
        let e = &self.experiment;
        if e.trials == 0 {
            return Err(invalid("experiment.trials", "must be >= 1"));
        }
        if !(e.ue_amplitude >= 0.0 && e.ue_amplitude.is_finite()) {
            return Err(invalid("experiment.ue_amplitude", "must be finite and >= 0"));
        }
        finite("experiment.insertion_loss_db", e.insertion_loss_db)?;
        if e.grid.bs_locations.is_empty() {
            return Err(invalid("experiment.grid.bs_locations", "must not be empty"));
        }
        let bs_locations = e
            .grid
            .bs_locations
            .iter()
            .enumerate()
            .map(|(i, b)| angle(&format!("experiment.grid.bs_locations[{i}]"), *b))
            .collect::<Result<Vec<_>, _>>()?;
        let mut ue_locations = Vec::new();
        for t in &e.grid.ue_theta_deg {
            for p in &e.grid.ue_phi_deg {
                ue_locations.push(angle("experiment.grid", [*t, *p])?);
            }
        }
        Ok(ExperimentConfig {
            geometry: self.array_geometry()?,
            detector: self.detector_model()?,
            localizer: self.localizer()?,
            policy: self.policy()?,
            bs_locations,
            ue_locations,
            trials: e.trials,
            seed: e.seed,
            ue_amplitude: e.ue_amplitude,
            insertion_loss_db: e.insertion_loss_db,
            output_dir: e.output_dir.clone(),
        })
    }

    pub fn showcase_samples(&self) -> Result<Vec<ShowcaseSample>, ConfigError> {
        self.experiment
            .showcase
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let path = format!("experiment.showcase.samples[{i}]");
                for r in [s.bs_range_m, s.ue_range_m].into_iter().flatten() {
                    if !(r > 0.0 && r.is_finite()) {
                        return Err(invalid(&path, "ranges must be finite and > 0"));
                    }
                }
                Ok(ShowcaseSample {
                    bs: angle(&format!("{path}.bs"), s.bs)?,
                    ue: angle(&format!("{path}.ue"), s.ue)?,
                    bs_range_m: s.bs_range_m,
                    ue_range_m: s.ue_range_m,
                })
            })
            .collect()
    }
}
