//! 1-bit coding synthesis and link evaluation.
//!
//! Each meta-atom reflects with phase 0 (state 0) or π (state 1). Codings
//! are obtained by quantizing the conjugate-phase profile that would make
//! the BS → element → UE contributions add coherently.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{spatial_frequencies, AngularLocation, ArrayGeometry, Position};
use crate::localization::regulate;
use crate::wavefield::{complex_field_at_array, Source, SourceKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BeamformingError {
    #[error("coding entries must be 0 or 1 (found {value} at ({m}, {n}))")]
    NonBinary { m: usize, n: usize, value: u8 },
    #[error("matrix is {got_z}x{got_x} but geometry is {want_z}x{want_x}")]
    ShapeMismatch { got_z: usize, got_x: usize, want_z: usize, want_x: usize },
    #[error("focal point must lie in front of the array (y > 0), got y={0}")]
    BehindArray(f64),
    #[error("invalid angle grid: {0}")]
    BadGrid(String),
}

fn check_shape(dim: (usize, usize), geom: &ArrayGeometry) -> Result<(), BeamformingError> {
    if dim != geom.shape() {
        return Err(BeamformingError::ShapeMismatch {
            got_z: dim.0,
            got_x: dim.1,
            want_z: geom.n_z(),
            want_x: geom.n_x(),
        });
    }
    Ok(())
}

/// Desired continuous reflection phase per element, radians.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile {
    pub values: Array2<f64>,
}

/// Binary reflection states, `[m-1, n-1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodingMatrix {
    states: Array2<u8>,
}

impl CodingMatrix {
    pub fn new(states: Array2<u8>) -> Result<Self, BeamformingError> {
        if let Some(((m, n), &value)) = states.indexed_iter().find(|(_, v)| **v > 1) {
            return Err(BeamformingError::NonBinary { m: m + 1, n: n + 1, value });
        }
        Ok(Self { states })
    }

    /// Uniform state 0: a flat mirror.
    pub fn all_zero(geom: &ArrayGeometry) -> Self {
        Self { states: Array2::zeros(geom.shape()) }
    }

    pub fn states(&self) -> &Array2<u8> {
        &self.states
    }

    pub fn dim(&self) -> (usize, usize) {
        self.states.dim()
    }

    pub fn flipped(&self) -> Self {
        Self { states: self.states.mapv(|s| 1 - s) }
    }

    pub fn reflection_phases(&self) -> Array2<f64> {
        self.states.mapv(|s| if s == 1 { PI } else { 0.0 })
    }
}

/// Phase-gradient steering from direction `bs` into direction `ue`.
///
/// `phase(m, n) = −k_0 (û_bs + û_ue)·p_mn` with `û` the unit vectors from
/// the array toward each terminal.
pub fn farfield_phase_profile(bs: AngularLocation, ue: AngularLocation, geom: &ArrayGeometry) -> PhaseProfile {
    let (a, b) = (bs.direction(), ue.direction());
    let sum = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
    let k0 = geom.wavenumber();
    PhaseProfile {
        values: Array2::from_shape_fn(geom.shape(), |(i, j)| -k0 * geom.element_position(i + 1, j + 1).dot(sum)),
    }
}

/// Conjugate of the round-trip propagation phase through each element,
/// focusing BS energy onto the point `ue_pos`.
pub fn nearfield_phase_profile(
    bs_pos: Position,
    ue_pos: Position,
    geom: &ArrayGeometry,
) -> Result<PhaseProfile, BeamformingError> {
    for p in [bs_pos, ue_pos] {
        if !(p.y > 0.0) {
            return Err(BeamformingError::BehindArray(p.y));
        }
    }
    let k0 = geom.wavenumber();
    Ok(PhaseProfile {
        values: Array2::from_shape_fn(geom.shape(), |(i, j)| {
            let p = geom.element_position(i + 1, j + 1);
            k0 * (bs_pos.distance(&p) + ue_pos.distance(&p))
        }),
    })
}

/// Nearest-state quantization; phases exactly ±π/2 from 0 map to state 0.
pub fn quantize_1bit(profile: &PhaseProfile) -> CodingMatrix {
    CodingMatrix {
        states: profile.values.mapv(|p| {
            let to_zero = regulate(p).abs();
            let to_pi = PI - to_zero;
            u8::from(to_zero > to_pi)
        }),
    }
}

/// Where the received power is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UeTarget {
    /// Far-field direction (plane-wave propagation factor).
    Direction(AngularLocation),
    /// Point in front of the array (spherical propagation factor).
    Point(Position),
}

fn propagation_to(target: &UeTarget, geom: &ArrayGeometry) -> Array2<Complex64> {
    let kind = match *target {
        UeTarget::Direction(d) => SourceKind::FarField(d),
        UeTarget::Point(p) => SourceKind::NearField(p),
    };
    complex_field_at_array(&Source { kind, amplitude: 1.0, phase_rad: 0.0, frequency_tag: 0 }, geom)
}

fn coherent_power(phases: &Array2<f64>, bs_src: &Source, target: &UeTarget, geom: &ArrayGeometry) -> f64 {
    let inc = complex_field_at_array(bs_src, geom);
    let prop = propagation_to(target, geom);
    let mut acc = Complex64::new(0.0, 0.0);
    for ((a, b), ph) in inc.iter().zip(prop.iter()).zip(phases.iter()) {
        acc += a * b * Complex64::from_polar(1.0, *ph);
    }
    acc.norm_sqr()
}

/// `|Σ incident · e^{iπ·state} · propagation|²`, relative to one unit
/// element illuminated by a unit wave.
pub fn received_power(
    coding: &CodingMatrix,
    bs_src: &Source,
    target: &UeTarget,
    geom: &ArrayGeometry,
) -> Result<f64, BeamformingError> {
    check_shape(coding.dim(), geom)?;
    Ok(coherent_power(&coding.reflection_phases(), bs_src, target, geom))
}

/// [`received_power`] for an ideal continuous-phase surface.
pub fn received_power_continuous(
    profile: &PhaseProfile,
    bs_src: &Source,
    target: &UeTarget,
    geom: &ArrayGeometry,
) -> Result<f64, BeamformingError> {
    check_shape(profile.values.dim(), geom)?;
    Ok(coherent_power(&profile.values, bs_src, target, geom))
}

/// Rectangular (θ, φ) evaluation grid, degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleGrid {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
}

impl AngleGrid {
    pub fn new(thetas: Vec<f64>, phis: Vec<f64>) -> Result<Self, BeamformingError> {
        if thetas.is_empty() || phis.is_empty() {
            return Err(BeamformingError::BadGrid("empty axis".into()));
        }
        if thetas.iter().chain(&phis).any(|a| !(a.abs() < 90.0)) {
            return Err(BeamformingError::BadGrid("angles must lie strictly within ±90°".into()));
        }
        Ok(Self { thetas, phis })
    }

    /// Inclusive ranges sampled every `step` degrees.
    pub fn uniform(theta: (f64, f64), phi: (f64, f64), step: f64) -> Result<Self, BeamformingError> {
        if !(step > 0.0) {
            return Err(BeamformingError::BadGrid("step must be positive".into()));
        }
        let axis = |(lo, hi): (f64, f64)| -> Vec<f64> {
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            (0..=n).map(|i| lo + i as f64 * step).collect()
        };
        Self::new(axis(theta), axis(phi))
    }
}

#[derive(Debug, Clone)]
pub struct Pattern {
    pub grid: AngleGrid,
    /// `[theta index, phi index]`, linear power.
    pub power: Array2<f64>,
    pub peak: AngularLocation,
    pub peak_power: f64,
    /// Half-power beamwidth through the peak; `None` if the beam runs off the grid.
    pub hpbw_theta_deg: Option<f64>,
    pub hpbw_phi_deg: Option<f64>,
}

/// Width of the half-power region around `peak` along one cut.
fn half_power_width(axis: &[f64], cut: &[f64], peak: usize) -> Option<f64> {
    let half = cut[peak] / 2.0;
    let crossing = |inside: usize, outside: usize| {
        let (a, b) = (cut[inside], cut[outside]);
        let t = (a - half) / (a - b);
        axis[inside] + t * (axis[outside] - axis[inside])
    };
    let mut lo = peak;
    while lo > 0 && cut[lo - 1] >= half {
        lo -= 1;
    }
    let mut hi = peak;
    while hi + 1 < cut.len() && cut[hi + 1] >= half {
        hi += 1;
    }
    if lo == 0 || hi + 1 == cut.len() {
        return None;
    }
    Some(crossing(hi, hi + 1) - crossing(lo, lo - 1))
}

/// Far-field power pattern of a coded surface under illumination `bs_src`.
pub fn pattern(
    coding: &CodingMatrix,
    bs_src: &Source,
    geom: &ArrayGeometry,
    grid: &AngleGrid,
) -> Result<Pattern, BeamformingError> {
    check_shape(coding.dim(), geom)?;
    let aperture: Array2<Complex64> = &complex_field_at_array(bs_src, geom) * &coding.reflection_phases().mapv(|p| Complex64::from_polar(1.0, p));
    let (nz, nx) = geom.shape();
    let rows: Vec<Vec<f64>> = grid
        .thetas
        .par_iter()
        .map(|&theta| {
            grid.phis
                .iter()
                .map(|&phi| {
                    let w = spatial_frequencies(AngularLocation { theta_deg: theta, phi_deg: phi }, geom);
                    let ex: Array1<Complex64> = (1..=nx).map(|n| Complex64::from_polar(1.0, n as f64 * w.omega_x)).collect();
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (m, row) in aperture.rows().into_iter().enumerate().take(nz) {
                        let inner: Complex64 = row.iter().zip(ex.iter()).map(|(a, e)| a * e).sum();
                        acc += inner * Complex64::from_polar(1.0, (m + 1) as f64 * w.omega_z);
                    }
                    acc.norm_sqr()
                })
                .collect()
        })
        .collect();
    let power = Array2::from_shape_fn((grid.thetas.len(), grid.phis.len()), |(i, j)| rows[i][j]);

    let ((ti, pj), &peak_power) = power
        .indexed_iter()
        .fold(None, |best: Option<((usize, usize), &f64)>, (idx, v)| match best {
            Some((_, b)) if *v <= *b => best,
            _ => Some((idx, v)),
        })
        .expect("non-empty grid");
    let theta_cut: Vec<f64> = power.column(pj).to_vec();
    let phi_cut: Vec<f64> = power.row(ti).to_vec();
    Ok(Pattern {
        peak: AngularLocation { theta_deg: grid.thetas[ti], phi_deg: grid.phis[pj] },
        peak_power,
        hpbw_theta_deg: half_power_width(&grid.thetas, &theta_cut, ti),
        hpbw_phi_deg: half_power_width(&grid.phis, &phi_cut, pj),
        grid: grid.clone(),
        power,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGain {
    pub gain_db: f64,
    /// The baseline power underflowed and was replaced by the floor.
    pub baseline_floored: bool,
}

/// Baseline powers below this fraction of the single-element reference
/// (scaled by the BS amplitude squared) are floored.
pub const BASELINE_POWER_FLOOR: f64 = 1e-12;

/// Power ratio of `coding` over `baseline` (all-zero when `None`) at the
/// target, in dB.
pub fn link_gain(
    coding: &CodingMatrix,
    baseline: Option<&CodingMatrix>,
    bs_src: &Source,
    target: &UeTarget,
    geom: &ArrayGeometry,
) -> Result<LinkGain, BeamformingError> {
    let zero;
    let baseline = match baseline {
        Some(b) => b,
        None => {
            zero = CodingMatrix::all_zero(geom);
            &zero
        }
    };
    let p = received_power(coding, bs_src, target, geom)?;
    let p0 = received_power(baseline, bs_src, target, geom)?;
    let floor = BASELINE_POWER_FLOOR * bs_src.amplitude * bs_src.amplitude;
    let baseline_floored = !(p0 > floor);
    let p0 = if baseline_floored { floor } else { p0 };
    Ok(LinkGain { gain_db: 10.0 * (p / p0).log10(), baseline_floored })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::wrap_degrees;
    use proptest::prelude::*;

    fn panel() -> ArrayGeometry {
        ArrayGeometry::reference_panel()
    }

    fn loc(t: f64, p: f64) -> AngularLocation {
        AngularLocation::new(t, p).unwrap()
    }

    fn bs_wave(l: AngularLocation) -> Source {
        Source::far(l, 1.0).unwrap()
    }

    fn wrapped(a: f64) -> f64 {
        regulate(a)
    }

    #[test]
    fn specular_profile_is_constant() {
        let p = farfield_phase_profile(AngularLocation::BROADSIDE, AngularLocation::BROADSIDE, &panel());
        assert!(p.values.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn steering_slope_matches_spatial_frequency() {
        let g = panel();
        let p = farfield_phase_profile(AngularLocation::BROADSIDE, loc(0.0, 30.0), &g);
        for j in 0..31 {
            let slope = p.values[[5, j + 1]] - p.values[[5, j]];
            assert!((slope + 0.733_545_76).abs() < 1e-7, "{slope}");
            assert!((p.values[[5, j]] - p.values[[6, j]]).abs() < 1e-12);
        }
    }

    #[test]
    fn profile_symmetric_in_terminals() {
        let g = panel();
        let a = farfield_phase_profile(loc(-15.0, 10.0), loc(20.0, -40.0), &g);
        let b = farfield_phase_profile(loc(20.0, -40.0), loc(-15.0, 10.0), &g);
        assert_eq!(a, b);
    }

    #[test]
    fn distant_focus_approaches_steering() {
        let g = panel();
        let (bs, ue) = (loc(-10.0, 20.0), loc(15.0, -35.0));
        let far = farfield_phase_profile(bs, ue, &g);
        let near = nearfield_phase_profile(Position::from_direction(bs, 100.0), Position::from_direction(ue, 100.0), &g)
            .unwrap();
        let diff = &near.values - &far.values;
        let offset = diff[[15, 15]];
        let worst = diff.iter().map(|d| wrapped(d - offset).abs()).fold(0.0, f64::max);
        assert!(worst < 0.2, "{worst}");
    }

    #[test]
    fn boresight_focus_is_radially_symmetric() {
        let g = panel();
        let ue = Position::new(0.0, 1.0, 0.0);
        let bs = Position::new(0.0, 1e6, 0.0);
        let p = nearfield_phase_profile(bs, ue, &g).unwrap();
        for i in 0..32 {
            for j in 0..32 {
                assert!((p.values[[i, j]] - p.values[[31 - i, 31 - j]]).abs() < 1e-6);
                assert!((p.values[[i, j]] - p.values[[j, i]]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn focal_spot_follows_target() {
        let g = panel();
        let bs = Position::new(0.0, 5.0, 0.0);
        let src = Source::near(bs, 1.0).unwrap();
        let power_at = |code: &CodingMatrix, x: f64| {
            received_power(code, &src, &UeTarget::Point(Position::new(x, 1.5, 0.0)), &g).unwrap()
        };
        for shift in [0.0, 0.3] {
            let code = quantize_1bit(&nearfield_phase_profile(bs, Position::new(shift, 1.5, 0.0), &g).unwrap());
            let xs: Vec<f64> = (-60..=60).map(|i| i as f64 * 0.01).collect();
            let best = xs.iter().cloned().max_by(|a, b| power_at(&code, *a).total_cmp(&power_at(&code, *b))).unwrap();
            assert!((best - shift).abs() < 0.03, "shift {shift} best {best}");
        }
    }

    #[test]
    fn quantization_basics() {
        let g = panel();
        let zero = PhaseProfile { values: Array2::zeros(g.shape()) };
        assert_eq!(quantize_1bit(&zero), CodingMatrix::all_zero(&g));
        let pi = PhaseProfile { values: Array2::from_elem(g.shape(), PI) };
        assert!(quantize_1bit(&pi).states().iter().all(|&s| s == 1));
        let tie = PhaseProfile { values: Array2::from_elem((2, 2), PI / 2.0) };
        assert!(quantize_1bit(&tie).states().iter().all(|&s| s == 0));
        let tie = PhaseProfile { values: Array2::from_elem((2, 2), -PI / 2.0) };
        assert!(quantize_1bit(&tie).states().iter().all(|&s| s == 0));
    }

    #[test]
    fn stripe_period() {
        let w = 0.733_545_757_683_088_6;
        let prof = PhaseProfile { values: Array2::from_shape_fn((1, 200), |(_, n)| w * n as f64) };
        let code = quantize_1bit(&prof);
        let row = code.states().row(0).to_vec();
        let rises: Vec<usize> = (1..row.len()).filter(|&i| row[i] == 0 && row[i - 1] == 1).collect();
        let period = (rises[rises.len() - 1] - rises[0]) as f64 / (rises.len() - 1) as f64;
        assert!((period - 2.0 * PI / w).abs() < 0.1, "{period}");
    }

    #[test]
    fn coherent_array_gain() {
        let g = panel();
        let bs = AngularLocation::BROADSIDE;
        let ue = loc(10.0, 25.0);
        let prof = farfield_phase_profile(bs, ue, &g);
        let p = received_power_continuous(&prof, &bs_wave(bs), &UeTarget::Direction(ue), &g).unwrap();
        assert!((p - 1024.0f64.powi(2)).abs() < 1e-6 * p);
        assert!((10.0 * p.log10() - 60.206).abs() < 1e-3);
    }

    #[test]
    fn mirror_reflects_specularly() {
        let g = panel();
        let grid = AngleGrid::uniform((-30.0, 30.0), (-60.0, 60.0), 1.0).unwrap();
        let bs = loc(10.0, 30.0);
        let pat = pattern(&CodingMatrix::all_zero(&g), &bs_wave(bs), &g, &grid).unwrap();
        assert_eq!((pat.peak.theta_deg, pat.peak.phi_deg), (-10.0, -30.0));
        let pat = pattern(&CodingMatrix::all_zero(&g), &bs_wave(AngularLocation::BROADSIDE), &g, &grid).unwrap();
        assert_eq!((pat.peak.theta_deg, pat.peak.phi_deg), (0.0, 0.0));
        assert!(pat.hpbw_phi_deg.unwrap() > 0.0);
    }

    #[test]
    fn uniform_aperture_sidelobe() {
        // closed-form reference: |sin(Nψ/2) / (N sin(ψ/2))|², ψ = k d sin φ
        let g = panel();
        let grid = AngleGrid::uniform((0.0, 0.0), (-89.0, 89.0), 0.05).unwrap();
        let pat = pattern(&CodingMatrix::all_zero(&g), &bs_wave(AngularLocation::BROADSIDE), &g, &grid).unwrap();
        let cut = pat.power.row(0).to_vec();
        let af = |phi: f64| {
            let psi = g.max_omega_x() * phi.to_radians().sin();
            let n = 32.0;
            if psi.abs() < 1e-12 {
                1.0
            } else {
                ((n * psi / 2.0).sin() / (n * (psi / 2.0).sin())).powi(2)
            }
        };
        for (phi, p) in grid.phis.iter().zip(&cut) {
            assert!((p / pat.peak_power - af(*phi)).abs() < 1e-9);
        }
        // first local maximum away from the main lobe
        let c = cut.len() / 2;
        let mut i = c + 1;
        while cut[i + 1] < cut[i] {
            i += 1;
        }
        while cut[i + 1] > cut[i] {
            i += 1;
        }
        let sll = 10.0 * (cut[i] / cut[c]).log10();
        assert!((sll + 13.26).abs() < 0.1, "{sll}");
    }

    #[test]
    fn steered_pattern_peaks_at_target() {
        let g = panel();
        let bs = AngularLocation::BROADSIDE;
        let ue = loc(0.0, 30.0);
        let code = quantize_1bit(&farfield_phase_profile(bs, ue, &g));
        let grid = AngleGrid::uniform((-20.0, 20.0), (-80.0, 80.0), 0.5).unwrap();
        let pat = pattern(&code, &bs_wave(bs), &g, &grid).unwrap();
        assert!(wrap_degrees(pat.peak.phi_deg.abs() - 30.0).abs() <= 0.5);
        assert_eq!(pat.peak.theta_deg, 0.0);
    }

    #[test]
    fn link_gain_basics() {
        let g = panel();
        let bs = AngularLocation::BROADSIDE;
        let ue = loc(0.0, 45.0);
        let code = quantize_1bit(&farfield_phase_profile(bs, ue, &g));
        let t = UeTarget::Direction(ue);
        let same = link_gain(&code, Some(&code), &bs_wave(bs), &t, &g).unwrap();
        assert_eq!(same.gain_db, 0.0);
        let gain = link_gain(&code, None, &bs_wave(bs), &t, &g).unwrap();
        assert!(gain.gain_db >= 15.0, "{gain:?}");
        let loud = Source::far(bs, 7.5).unwrap();
        let scaled = link_gain(&code, None, &loud, &t, &g).unwrap();
        assert!((scaled.gain_db - gain.gain_db).abs() < 1e-9);
    }

    #[test]
    fn floored_baseline_is_flagged() {
        let g = panel();
        let silent = Source::far(AngularLocation::BROADSIDE, 0.0).unwrap();
        let code = CodingMatrix::all_zero(&g);
        let r = link_gain(&code, None, &silent, &UeTarget::Direction(loc(0.0, 20.0)), &g).unwrap();
        assert!(r.baseline_floored);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = panel();
        assert!(CodingMatrix::new(Array2::from_elem((2, 2), 2)).is_err());
        let small = CodingMatrix::new(Array2::zeros((2, 2))).unwrap();
        let t = UeTarget::Direction(AngularLocation::BROADSIDE);
        assert!(received_power(&small, &bs_wave(AngularLocation::BROADSIDE), &t, &g).is_err());
        assert!(nearfield_phase_profile(Position::new(0.0, -1.0, 0.0), Position::new(0.0, 1.0, 0.0), &g).is_err());
        assert!(AngleGrid::new(vec![95.0], vec![0.0]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn bit_flip_preserves_power(
            bits in proptest::collection::vec(0u8..2, 64),
            bt in -40.0f64..40.0, bp in -60.0f64..60.0, ut in -40.0f64..40.0, up in -60.0f64..60.0,
        ) {
            let g = ArrayGeometry::new(8, 8, 0.02, 0.02, 3_500_000_000).unwrap();
            let code = CodingMatrix::new(Array2::from_shape_vec((8, 8), bits).unwrap()).unwrap();
            let src = bs_wave(loc(bt, bp));
            let t = UeTarget::Direction(loc(ut, up));
            let a = received_power(&code, &src, &t, &g).unwrap();
            let b = received_power(&code.flipped(), &src, &t, &g).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }

        #[test]
        fn reciprocity(bt in -40.0f64..40.0, bp in -60.0f64..60.0, ut in -40.0f64..40.0, up in -60.0f64..60.0) {
            let g = panel();
            let (bs, ue) = (loc(bt, bp), loc(ut, up));
            let c1 = quantize_1bit(&farfield_phase_profile(bs, ue, &g));
            let c2 = quantize_1bit(&farfield_phase_profile(ue, bs, &g));
            prop_assert_eq!(&c1, &c2);
            let p1 = received_power(&c1, &bs_wave(bs), &UeTarget::Direction(ue), &g).unwrap();
            let p2 = received_power(&c2, &bs_wave(ue), &UeTarget::Direction(bs), &g).unwrap();
            prop_assert!((p1 - p2).abs() <= 1e-9 * p1.max(1.0));
        }
    }
}
