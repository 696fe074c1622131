//! Coherent illumination of the array and the detector-side hologram.
//!
//! Every element carries a square-law power detector. With the base station
//! (reference) and a user (object) transmitting on the same carrier, the
//! detectors record `I_mn = |α_mn + β_mn|²`, which is then degraded by the
//! [`DetectorModel`].

use std::collections::BTreeSet;

use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::geometry::{spatial_frequencies, AngularLocation, ArrayGeometry, Position};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WavefieldError {
    #[error("source amplitude must be finite and non-negative (got {0})")]
    BadAmplitude(f64),
    #[error("near-field source must lie in front of the array (y > 0), got y={0}")]
    BehindArray(f64),
    #[error("invalid detector model: {0}")]
    InvalidDetector(String),
    #[error("frequency tag {tag} has {count} source(s); interference needs at least two")]
    NotEnoughSources { tag: u32, count: usize },
    #[error("hologram is {got_z}x{got_x} but geometry is {want_z}x{want_x}")]
    ShapeMismatch { got_z: usize, got_x: usize, want_z: usize, want_x: usize },
    #[error("hologram value at ({m}, {n}) is negative or not finite: {value}")]
    BadIntensity { m: usize, n: usize, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceKind {
    FarField(AngularLocation),
    NearField(Position),
}

/// A coherent transmitter illuminating the array (base station or user).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Source {
    pub kind: SourceKind,
    pub amplitude: f64,
    pub phase_rad: f64,
    /// 0 is the shared carrier; positive tags are per-user subcarriers.
    pub frequency_tag: u32,
}

impl Source {
    pub fn far(loc: AngularLocation, amplitude: f64) -> Result<Self, WavefieldError> {
        check_amplitude(amplitude)?;
        Ok(Self { kind: SourceKind::FarField(loc), amplitude, phase_rad: 0.0, frequency_tag: 0 })
    }

    pub fn near(pos: Position, amplitude: f64) -> Result<Self, WavefieldError> {
        check_amplitude(amplitude)?;
        if !(pos.y > 0.0) {
            return Err(WavefieldError::BehindArray(pos.y));
        }
        Ok(Self { kind: SourceKind::NearField(pos), amplitude, phase_rad: 0.0, frequency_tag: 0 })
    }

    pub fn with_phase(mut self, phase_rad: f64) -> Self {
        self.phase_rad = phase_rad;
        self
    }

    pub fn with_tag(mut self, tag: u32) -> Self {
        self.frequency_tag = tag;
        self
    }
}

fn check_amplitude(a: f64) -> Result<(), WavefieldError> {
    if a.is_finite() && a >= 0.0 {
        Ok(())
    } else {
        Err(WavefieldError::BadAmplitude(a))
    }
}

/// Power-detector imperfections applied after square-law detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    /// Std of additive Gaussian noise on the intensity reading.
    pub noise_std: f64,
    /// Minimum detectable intensity; lower readings are reported as `floor`.
    pub floor: f64,
    /// Saturation intensity.
    pub ceiling: f64,
    /// Rescale each hologram so its maximum lands on `ceiling`.
    pub agc_enabled: bool,
    /// Std (radians) of the per-snapshot carrier phase error between sources.
    pub phase_jitter_std: f64,
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self::ideal()
    }
}

impl DetectorModel {
    /// Noiseless, unclipped detector.
    pub fn ideal() -> Self {
        Self { noise_std: 0.0, floor: 0.0, ceiling: f64::INFINITY, agc_enabled: false, phase_jitter_std: 0.0 }
    }

    pub fn validate(&self) -> Result<(), WavefieldError> {
        let bad = |m: &str| Err(WavefieldError::InvalidDetector(m.to_string()));
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return bad("noise_std must be finite and >= 0");
        }
        if !(self.phase_jitter_std >= 0.0 && self.phase_jitter_std.is_finite()) {
            return bad("phase_jitter_std must be finite and >= 0");
        }
        if !(self.floor >= 0.0 && self.floor.is_finite()) {
            return bad("floor must be finite and >= 0");
        }
        if !(self.ceiling > self.floor) {
            return bad("ceiling must exceed floor");
        }
        if self.agc_enabled && !self.ceiling.is_finite() {
            return bad("agc requires a finite ceiling");
        }
        Ok(())
    }

    /// Apply noise, AGC and dynamic-range clipping to a clean intensity map.
    fn apply(&self, clean: &mut Array2<f64>, rng: &mut ChaCha8Rng) {
        if self.noise_std > 0.0 {
            let normal = Normal::new(0.0, self.noise_std).expect("validated std");
            clean.iter_mut().for_each(|v| *v += normal.sample(rng));
        }
        if self.agc_enabled {
            let max = clean.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if max > 0.0 {
                let gain = self.ceiling / max;
                clean.mapv_inplace(|v| v * gain);
            }
        }
        let (lo, hi) = (self.floor, self.ceiling);
        clean.mapv_inplace(|v| if v.is_nan() { lo } else { v.clamp(lo, hi) });
    }
}

/// Real, non-negative intensity map recorded by the detector array.
#[derive(Debug, Clone, PartialEq)]
pub struct Hologram {
    values: Array2<f64>,
    geometry: ArrayGeometry,
    frequency_tag: u32,
}

impl Hologram {
    pub fn new(values: Array2<f64>, geometry: ArrayGeometry, frequency_tag: u32) -> Result<Self, WavefieldError> {
        let (rz, rx) = values.dim();
        if (rz, rx) != geometry.shape() {
            return Err(WavefieldError::ShapeMismatch {
                got_z: rz,
                got_x: rx,
                want_z: geometry.n_z(),
                want_x: geometry.n_x(),
            });
        }
        if let Some(((m, n), &value)) = values.indexed_iter().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(WavefieldError::BadIntensity { m: m + 1, n: n + 1, value });
        }
        Ok(Self { values, geometry, frequency_tag })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    pub fn frequency_tag(&self) -> u32 {
        self.frequency_tag
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SynthesisWarning {
    /// Every source of this tag arrives with the same phase gradient, so the
    /// hologram carries no fringes.
    DegenerateInterference { tag: u32 },
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    /// One hologram per frequency tag, ascending.
    pub holograms: Vec<Hologram>,
    pub warnings: Vec<SynthesisWarning>,
}

/// Complex field of `src` at every element, indexed `[m-1, n-1]`.
///
/// Far-field sources are plane waves whose per-sample phase increments are
/// exactly [`spatial_frequencies`]. Near-field sources use the exact
/// element distance with spherical spreading normalized to unity at the
/// array center.
pub fn complex_field_at_array(src: &Source, geom: &ArrayGeometry) -> Array2<Complex64> {
    match src.kind {
        SourceKind::FarField(loc) => {
            let f = spatial_frequencies(loc, geom);
            Array2::from_shape_fn(geom.shape(), |(i, j)| {
                let phase = src.phase_rad + (i + 1) as f64 * f.omega_z + (j + 1) as f64 * f.omega_x;
                Complex64::from_polar(src.amplitude, phase)
            })
        }
        SourceKind::NearField(p) => {
            let k0 = geom.wavenumber();
            let r_ref = p.norm();
            Array2::from_shape_fn(geom.shape(), |(i, j)| {
                let r = p.distance(&geom.element_position(i + 1, j + 1));
                let spread = (r / r_ref).max(1.0);
                Complex64::from_polar(src.amplitude / spread, src.phase_rad - k0 * r)
            })
        }
    }
}

/// Sources that interfere on each detector snapshot.
///
/// Tag-0 sources (shared carrier, e.g. the base station) are present in
/// every snapshot. When any positive tag exists, one snapshot per positive
/// tag is produced, holding the tag-0 sources plus that tag's sources.
/// Otherwise a single tag-0 snapshot is produced.
fn interference_groups(sources: &[Source]) -> Vec<(u32, Vec<Source>)> {
    let shared: Vec<Source> = sources.iter().filter(|s| s.frequency_tag == 0).copied().collect();
    let tags: BTreeSet<u32> = sources.iter().map(|s| s.frequency_tag).filter(|&t| t > 0).collect();
    if tags.is_empty() {
        return vec![(0, shared)];
    }
    tags.into_iter()
        .map(|t| {
            let mut group = shared.clone();
            group.extend(sources.iter().filter(|s| s.frequency_tag == t).copied());
            (t, group)
        })
        .collect()
}

fn is_degenerate(group: &[Source], geom: &ArrayGeometry) -> bool {
    let first = group[0];
    group.iter().all(|s| match (first.kind, s.kind) {
        (SourceKind::FarField(a), SourceKind::FarField(b)) => {
            let (fa, fb) = (spatial_frequencies(a, geom), spatial_frequencies(b, geom));
            (fa.omega_z - fb.omega_z).abs() < 1e-12 && (fa.omega_x - fb.omega_x).abs() < 1e-12
        }
        (SourceKind::NearField(a), SourceKind::NearField(b)) => a.distance(&b) < 1e-12,
        _ => false,
    })
}

/// Record one hologram per frequency tag.
///
/// All randomness (detector noise, carrier jitter) comes from `seed`; equal
/// inputs give bit-identical output. The jitter draw is added to every
/// source of a snapshot except the first, i.e. it perturbs the carrier phase
/// of the other transmitters relative to the reference.
pub fn synthesize_hologram(
    sources: &[Source],
    geom: &ArrayGeometry,
    det: &DetectorModel,
    seed: u64,
) -> Result<Synthesis, WavefieldError> {
    det.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut holograms = Vec::new();
    let mut warnings = Vec::new();
    for (tag, mut group) in interference_groups(sources) {
        if group.len() < 2 {
            return Err(WavefieldError::NotEnoughSources { tag, count: group.len() });
        }
        if is_degenerate(&group, geom) {
            warnings.push(SynthesisWarning::DegenerateInterference { tag });
        }
        if det.phase_jitter_std > 0.0 {
            let jitter = Normal::new(0.0, det.phase_jitter_std).expect("validated std").sample(&mut rng);
            group.iter_mut().skip(1).for_each(|s| s.phase_rad += jitter);
        }
        let mut field = Array2::<Complex64>::zeros(geom.shape());
        for s in &group {
            field += &complex_field_at_array(s, geom);
        }
        let mut intensity = field.mapv(|c| c.norm_sqr());
        det.apply(&mut intensity, &mut rng);
        holograms.push(Hologram::new(intensity, *geom, tag)?);
    }
    Ok(Synthesis { holograms, warnings })
}
