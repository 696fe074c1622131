//! Holographic user localization by 2D-FFT peak picking.
//!
//! The cross terms of `|α + β|²` put a conjugate pair of peaks at the
//! differential spatial frequency `±(ω_UE − ω_BS)`. Knowing the base-station
//! direction, the off-DC peak yields two candidate user directions (the twin
//! image pair); a [`Disambiguation`] policy picks one.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::geometry::{angles_from_frequencies, spatial_frequencies, AngularLocation, ArrayGeometry, SpatialFrequencyPair};
use crate::wavefield::Hologram;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocalizationError {
    #[error("hologram must be at least 2x2 (got {0}x{1})")]
    TooSmall(usize, usize),
    #[error("zero-pad factor must be >= 1")]
    BadPadding,
    #[error("no significant off-DC spectral peak (peak/median = {peak_to_median:.3})")]
    NoPeak { peak_to_median: f64 },
    #[error("both twin candidates are evanescent")]
    AllCandidatesInfeasible,
    #[error("both candidates lie inside the admissible sector")]
    SectorAmbiguous,
    #[error("no candidate lies inside the admissible sector")]
    SectorEmpty,
    #[error("invalid search grid: {0}")]
    BadGrid(String),
}

/// 2D DFT of a hologram, unnormalized, optionally zero-padded.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Array2<Complex64>,
    pub zero_pad_factor: usize,
    /// `Σ|I|` of the transformed input, the scale for peak significance.
    input_l1: f64,
}

impl Spectrum {
    pub fn dim(&self) -> (usize, usize) {
        self.values.dim()
    }

    pub fn magnitudes(&self) -> Array2<f64> {
        self.values.mapv(|c| c.norm())
    }
}

/// Amplitudes of the three-peak structure at a located peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPeaks {
    /// DC term.
    pub dc_amplitude: Complex64,
    /// Cross-term bin value at the located peak.
    pub pair_amplitude: Complex64,
    /// Differential frequencies of the located peak, regulated.
    pub pair_location: SpatialFrequencyPair,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakSearch {
    /// Half-width of the excluded square around DC; 0 excludes only (0,0).
    pub dc_guard: usize,
    /// Minimum peak / median(|off-DC bins|) for a peak to count.
    pub min_peak_to_median: f64,
}

impl Default for PeakSearch {
    fn default() -> Self {
        Self { dc_guard: 0, min_peak_to_median: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPeak {
    /// 1-based `(i_z, i_x)`.
    pub bin: (usize, usize),
    pub magnitude: f64,
    pub peak_to_median: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizerConfig {
    pub zero_pad_factor: usize,
    pub peak: PeakSearch,
}

impl Default for LocalizerConfig {
    fn default() -> Self {
        Self { zero_pad_factor: 1, peak: PeakSearch::default() }
    }
}

/// Admissible (θ, φ) box in degrees, bounds inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    pub theta_deg: (f64, f64),
    pub phi_deg: (f64, f64),
}

impl Sector {
    pub fn contains(&self, loc: &AngularLocation) -> bool {
        (self.theta_deg.0..=self.theta_deg.1).contains(&loc.theta_deg)
            && (self.phi_deg.0..=self.phi_deg.1).contains(&loc.phi_deg)
    }
}

/// How to resolve the twin-image pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Disambiguation {
    /// Report both candidates.
    None,
    /// Evaluation only: pick the candidate closest to the ground truth.
    Oracle(AngularLocation),
    /// Pick the unique candidate inside a prior sector.
    Sector(Sector),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationResult {
    /// From `regulate(ω_BS + ω_peak)`; `None` when evanescent.
    pub candidate_1: Option<AngularLocation>,
    /// From `regulate(ω_BS − ω_peak)`; `None` when evanescent.
    pub candidate_2: Option<AngularLocation>,
    pub chosen: Option<AngularLocation>,
    /// 1-based `(i_z, i_x)` in the (possibly padded) spectrum.
    pub peak_bin: (usize, usize),
    pub peak_to_median_ratio: f64,
}

impl LocalizationResult {
    pub fn candidates(&self) -> impl Iterator<Item = AngularLocation> {
        self.candidate_1.into_iter().chain(self.candidate_2)
    }
}

/// `x − 2π·round(x/2π)`, rounding half away from zero.
pub fn regulate(x: f64) -> f64 {
    x - 2.0 * PI * (x / (2.0 * PI)).round()
}

fn fft2_array(input: &Array2<f64>, pad: usize) -> Array2<Complex64> {
    let (nz, nx) = input.dim();
    let (pz, px) = (nz * pad, nx * pad);
    let mut out = Array2::<Complex64>::zeros((pz, px));
    for ((i, j), v) in input.indexed_iter() {
        out[[i, j]] = Complex64::new(*v, 0.0);
    }
    let mut planner = FftPlanner::<f64>::new();
    // index m (rows) first, then index n
    let fz = planner.plan_fft_forward(pz);
    let mut buf = vec![Complex64::new(0.0, 0.0); pz];
    for j in 0..nx {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = out[[i, j]];
        }
        fz.process(&mut buf);
        for (i, b) in buf.iter().enumerate() {
            out[[i, j]] = *b;
        }
    }
    let fx = planner.plan_fft_forward(px);
    for mut row in out.rows_mut() {
        let mut r: Vec<Complex64> = row.to_vec();
        fx.process(&mut r);
        row.iter_mut().zip(r).for_each(|(dst, src)| *dst = src);
    }
    out
}

/// Two consecutive 1D DFTs (over `m`, then `n`) of the hologram, each axis
/// zero-padded to `zero_pad_factor · N` points.
pub fn fft2(holo: &Hologram, zero_pad_factor: usize) -> Result<Spectrum, LocalizationError> {
    spectrum_of(holo.values(), zero_pad_factor)
}

fn spectrum_of(values: &Array2<f64>, zero_pad_factor: usize) -> Result<Spectrum, LocalizationError> {
    let (nz, nx) = values.dim();
    if nz < 2 || nx < 2 {
        return Err(LocalizationError::TooSmall(nz, nx));
    }
    if zero_pad_factor == 0 {
        return Err(LocalizationError::BadPadding);
    }
    Ok(Spectrum {
        values: fft2_array(values, zero_pad_factor),
        zero_pad_factor,
        input_l1: values.iter().map(|v| v.abs()).sum(),
    })
}

fn cyclic_offset(k: usize, n: usize) -> usize {
    k.min(n - k)
}

/// Strongest off-DC bin of the half-spectrum `k ≤ N_z/2`.
///
/// Magnitudes equal to within 1e-12 relative count as ties and go to the
/// lexicographically smaller `(k, ℓ)`; for real input this makes the choice
/// between the two conjugate bins of row 0 (or row N_z/2) deterministic.
pub fn find_peak(spec: &Spectrum, opts: &PeakSearch) -> Result<SpectralPeak, LocalizationError> {
    let (nz, nx) = spec.dim();
    let mags = spec.magnitudes();
    let g = opts.dc_guard;
    let excluded = |k: usize, l: usize| cyclic_offset(k, nz) <= g && cyclic_offset(l, nx) <= g;

    let mut off_dc: Vec<f64> = mags
        .indexed_iter()
        .filter(|((k, l), _)| !excluded(*k, *l))
        .map(|(_, v)| *v)
        .collect();
    if off_dc.is_empty() {
        return Err(LocalizationError::NoPeak { peak_to_median: 0.0 });
    }
    let mid = off_dc.len() / 2;
    let median = *off_dc.select_nth_unstable_by(mid, |a, b| a.total_cmp(b)).1;

    let mut best: Option<((usize, usize), f64)> = None;
    for k in 0..=nz / 2 {
        for l in 0..nx {
            if excluded(k, l) {
                continue;
            }
            let m = mags[[k, l]];
            match best {
                Some((_, b)) if m <= b * (1.0 + 1e-12) => {}
                _ => best = Some(((k, l), m)),
            }
        }
    }
    let ((k, l), magnitude) = best.ok_or(LocalizationError::NoPeak { peak_to_median: 0.0 })?;
    let peak_to_median = if median > 0.0 { magnitude / median } else { f64::INFINITY };
    if magnitude <= 1e-9 * spec.input_l1 || peak_to_median < opts.min_peak_to_median {
        return Err(LocalizationError::NoPeak { peak_to_median });
    }
    Ok(SpectralPeak { bin: (k + 1, l + 1), magnitude, peak_to_median })
}

/// Angular frequency of a 1-based bin, in `[0, 2π)`.
fn bin_frequency(i: usize, n: usize) -> f64 {
    2.0 * PI * (i - 1) as f64 / n as f64
}

pub fn spectral_peaks(spec: &Spectrum, peak: &SpectralPeak) -> SpectralPeaks {
    let (nz, nx) = spec.dim();
    let (iz, ix) = peak.bin;
    SpectralPeaks {
        dc_amplitude: spec.values[[0, 0]],
        pair_amplitude: spec.values[[iz - 1, ix - 1]],
        pair_location: SpatialFrequencyPair::new(regulate(bin_frequency(iz, nz)), regulate(bin_frequency(ix, nx))),
    }
}

/// Twin candidate frequency pairs for a peak at `peak_freq`.
pub fn candidate_frequencies(
    bs: SpatialFrequencyPair,
    peak_freq: SpatialFrequencyPair,
) -> [SpatialFrequencyPair; 2] {
    [
        SpatialFrequencyPair::new(regulate(bs.omega_z + peak_freq.omega_z), regulate(bs.omega_x + peak_freq.omega_x)),
        SpatialFrequencyPair::new(regulate(bs.omega_z - peak_freq.omega_z), regulate(bs.omega_x - peak_freq.omega_x)),
    ]
}

fn to_direction(f: SpatialFrequencyPair, geom: &ArrayGeometry) -> Option<AngularLocation> {
    if !f.is_propagating(geom) {
        return None;
    }
    angles_from_frequencies(f, geom).ok()
}

/// Peak search and twin-candidate generation, leaving `chosen` empty.
///
/// The hologram mean is removed before transforming. Without padding this
/// only changes the excluded DC bin; with padding it keeps the DC term's
/// sinc leakage out of the search.
pub fn localize_candidates(
    holo: &Hologram,
    bs: AngularLocation,
    cfg: &LocalizerConfig,
) -> Result<LocalizationResult, LocalizationError> {
    let geom = holo.geometry();
    let values = holo.values();
    let mean = values.mean().unwrap_or(0.0);
    let mut spec = spectrum_of(&values.mapv(|v| v - mean), cfg.zero_pad_factor)?;
    spec.input_l1 = values.iter().map(|v| v.abs()).sum();
    let peak = find_peak(&spec, &cfg.peak)?;

    let (nz, nx) = spec.dim();
    let peak_freq = SpatialFrequencyPair::new(bin_frequency(peak.bin.0, nz), bin_frequency(peak.bin.1, nx));
    let [c1, c2] = candidate_frequencies(spatial_frequencies(bs, geom), peak_freq);
    let (candidate_1, candidate_2) = (to_direction(c1, geom), to_direction(c2, geom));
    if candidate_1.is_none() && candidate_2.is_none() {
        return Err(LocalizationError::AllCandidatesInfeasible);
    }
    Ok(LocalizationResult {
        candidate_1,
        candidate_2,
        chosen: None,
        peak_bin: peak.bin,
        peak_to_median_ratio: peak.peak_to_median,
    })
}

pub fn localize(
    holo: &Hologram,
    bs: AngularLocation,
    cfg: &LocalizerConfig,
    policy: &Disambiguation,
) -> Result<LocalizationResult, LocalizationError> {
    disambiguate(&localize_candidates(holo, bs, cfg)?, policy)
}

pub fn disambiguate(
    result: &LocalizationResult,
    policy: &Disambiguation,
) -> Result<LocalizationResult, LocalizationError> {
    let chosen = match policy {
        Disambiguation::None => None,
        Disambiguation::Oracle(truth) => result.candidates().min_by(|a, b| {
            a.angular_distance(truth).total_cmp(&b.angular_distance(truth))
        }),
        Disambiguation::Sector(sector) => {
            let inside: Vec<AngularLocation> = result.candidates().filter(|c| sector.contains(c)).collect();
            match inside.as_slice() {
                [one] => Some(*one),
                [] => return Err(LocalizationError::SectorEmpty),
                _ => return Err(LocalizationError::SectorAmbiguous),
            }
        }
    };
    Ok(LocalizationResult { chosen, ..*result })
}

/// Least-squares fit of `a + b·cos ψ + c·sin ψ` to the hologram for the
/// fringe phase `ψ_mn = m·Δ_z + n·Δ_x`; returns the residual sum of squares.
struct FringeFit<'a> {
    values: &'a Array2<f64>,
    energy: f64,
    sum: f64,
}

impl<'a> FringeFit<'a> {
    fn new(values: &'a Array2<f64>) -> Self {
        Self { values, energy: values.iter().map(|v| v * v).sum(), sum: values.sum() }
    }

    fn residual(&self, dz: f64, dx: f64) -> f64 {
        let (nz, nx) = self.values.dim();
        let ez: Vec<Complex64> = (1..=nz).map(|m| Complex64::from_polar(1.0, m as f64 * dz)).collect();
        let ex: Vec<Complex64> = (1..=nx).map(|n| Complex64::from_polar(1.0, n as f64 * dx)).collect();
        // Σ I·e^{iψ}
        let mut proj = Complex64::new(0.0, 0.0);
        for (row, wz) in self.values.rows().into_iter().zip(&ez) {
            let inner: Complex64 = row.iter().zip(&ex).map(|(v, w)| w * *v).sum();
            proj += wz * inner;
        }
        let s1: Complex64 = ez.iter().sum::<Complex64>() * ex.iter().sum::<Complex64>();
        let s2: Complex64 = ez.iter().map(|w| w * w).sum::<Complex64>() * ex.iter().map(|w| w * w).sum::<Complex64>();
        let n = (nz * nx) as f64;
        let gram = [
            [n, s1.re, s1.im],
            [s1.re, 0.5 * (n + s2.re), 0.5 * s2.im],
            [s1.im, 0.5 * s2.im, 0.5 * (n - s2.re)],
        ];
        let rhs = [self.sum, proj.re, proj.im];
        match solve3(gram, rhs) {
            Some(x) => self.energy - (rhs[0] * x[0] + rhs[1] * x[1] + rhs[2] * x[2]),
            None => self.energy - self.sum * self.sum / n,
        }
    }
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    // entries scale like the element count n, the determinant like n³
    if d.abs() <= 1e-10 * a[0][0].powi(3) {
        return None;
    }
    let mut x = [0.0; 3];
    for (c, xc) in x.iter_mut().enumerate() {
        let mut m = a;
        for r in 0..3 {
            m[r][c] = b[r];
        }
        *xc = det(m) / d;
    }
    Some(x)
}

/// Exhaustive maximum-likelihood refinement around a coarse estimate.
///
/// The grid is aligned to multiples of `grid_step_deg` and covers
/// `coarse ± search_halfwidth_deg` on both axes (points outside the front
/// half-space are skipped). Each point is scored by the residual of the
/// best-fitting two-wave hologram with that user direction, the unknown DC
/// level and complex cross-term amplitude concentrated out by least squares.
pub fn ml_refine(
    holo: &Hologram,
    bs: AngularLocation,
    coarse: AngularLocation,
    search_halfwidth_deg: f64,
    grid_step_deg: f64,
) -> Result<AngularLocation, LocalizationError> {
    if !(grid_step_deg > 0.0 && grid_step_deg.is_finite()) {
        return Err(LocalizationError::BadGrid("grid step must be positive".into()));
    }
    if !(search_halfwidth_deg >= 0.0 && search_halfwidth_deg.is_finite()) {
        return Err(LocalizationError::BadGrid("search half-width must be >= 0".into()));
    }
    let geom = holo.geometry();
    let wbs = spatial_frequencies(bs, geom);
    let fit = FringeFit::new(holo.values());
    let half = (search_halfwidth_deg / grid_step_deg).ceil() as i64;
    let axis = |center: f64| {
        let c = (center / grid_step_deg).round();
        (-half..=half).map(move |i| (c + i as f64) * grid_step_deg).filter(|a| a.abs() < 90.0)
    };

    let mut best = coarse;
    let mut best_cost = f64::INFINITY;
    for theta in axis(coarse.theta_deg) {
        for phi in axis(coarse.phi_deg) {
            let loc = AngularLocation { theta_deg: theta, phi_deg: phi };
            let w = spatial_frequencies(loc, geom);
            let cost = fit.residual(w.omega_z - wbs.omega_z, w.omega_x - wbs.omega_x);
            if cost < best_cost {
                best_cost = cost;
                best = loc;
            }
        }
    }
    Ok(best)
}

/// Independent localization of each frequency-tagged hologram.
pub fn multiuser_localize<F>(
    holos: &[Hologram],
    bs: AngularLocation,
    cfg: &LocalizerConfig,
    policy_for: F,
) -> BTreeMap<u32, Result<LocalizationResult, LocalizationError>>
where
    F: Fn(u32) -> Disambiguation,
{
    holos
        .iter()
        .map(|h| (h.frequency_tag(), localize(h, bs, cfg, &policy_for(h.frequency_tag()))))
        .collect()
}
