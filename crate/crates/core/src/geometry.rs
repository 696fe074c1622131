//! Array coordinate system and the angle <-> spatial-frequency maps.
//!
//! The surface lies in the xOz plane, centered at the origin, with its normal
//! along +y. Rows (index `m`) run along z, columns (index `n`) along x. Both
//! indices are 1-based at the public interface, which keeps the FFT bin
//! arithmetic of the localizer (`2π(i-1)/N`) literal.
//!
//! Angles are in degrees everywhere outside this module's internals.

use std::f64::consts::PI;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Vacuum speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("array must have at least one row and one column (got {n_z}x{n_x})")]
    EmptyArray { n_z: usize, n_x: usize },
    #[error("element pitch must be positive and finite (d_z={d_z}, d_x={d_x})")]
    BadPitch { d_z: f64, d_x: f64 },
    #[error("carrier frequency must be positive")]
    BadFrequency,
    #[error("angle ({theta_deg}°, {phi_deg}°) is outside the front half-space")]
    OutsideFrontHalfSpace { theta_deg: f64, phi_deg: f64 },
    #[error(
        "spatial frequency pair (omega_z={omega_z}, omega_x={omega_x}) is evanescent: no propagating direction"
    )]
    InfeasibleFrequency { omega_z: f64, omega_x: f64 },
}

/// Uniform rectangular detector/meta-atom grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    n_z: usize,
    n_x: usize,
    d_z: f64,
    d_x: f64,
    f_c_hz: u64,
}

impl ArrayGeometry {
    pub fn new(n_z: usize, n_x: usize, d_z: f64, d_x: f64, f_c_hz: u64) -> Result<Self, GeometryError> {
        if n_z == 0 || n_x == 0 {
            return Err(GeometryError::EmptyArray { n_z, n_x });
        }
        if !(d_z > 0.0 && d_x > 0.0 && d_z.is_finite() && d_x.is_finite()) {
            return Err(GeometryError::BadPitch { d_z, d_x });
        }
        if f_c_hz == 0 {
            return Err(GeometryError::BadFrequency);
        }
        Ok(Self { n_z, n_x, d_z, d_x, f_c_hz })
    }

    /// The 32x32 panel with 20 mm pitch at 3.5 GHz.
    pub fn reference_panel() -> Self {
        Self { n_z: 32, n_x: 32, d_z: 0.02, d_x: 0.02, f_c_hz: 3_500_000_000 }
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn d_z(&self) -> f64 {
        self.d_z
    }

    pub fn d_x(&self) -> f64 {
        self.d_x
    }

    pub fn f_c_hz(&self) -> u64 {
        self.f_c_hz
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_z, self.n_x)
    }

    pub fn num_elements(&self) -> usize {
        self.n_z * self.n_x
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.f_c_hz as f64
    }

    /// Free-space wavenumber `k_0 = 2π/λ`.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength()
    }

    /// Largest spatial frequency (rad/sample) a propagating wave can produce
    /// along z, i.e. `2π d_z / λ`.
    pub fn max_omega_z(&self) -> f64 {
        2.0 * PI * self.d_z / self.wavelength()
    }

    /// Same as [`max_omega_z`](Self::max_omega_z) along x.
    pub fn max_omega_x(&self) -> f64 {
        2.0 * PI * self.d_x / self.wavelength()
    }

    /// Position of element `(m, n)`, both 1-based.
    pub fn element_position(&self, m: usize, n: usize) -> Position {
        let x = (n as f64 - (self.n_x as f64 + 1.0) / 2.0) * self.d_x;
        let z = (m as f64 - (self.n_z as f64 + 1.0) / 2.0) * self.d_z;
        Position::new(x, 0.0, z)
    }
}

/// Point in the array frame, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub const ORIGIN: Position = Position { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Point at `range_m` from the array center along the direction of `loc`.
    pub fn from_direction(loc: AngularLocation, range_m: f64) -> Self {
        let [x, y, z] = loc.direction();
        Self::new(range_m * x, range_m * y, range_m * z)
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn distance(&self, other: &Position) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn dot(&self, v: [f64; 3]) -> f64 {
        self.x * v[0] + self.y * v[1] + self.z * v[2]
    }
}

/// Direction of a source as seen from the array center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularLocation {
    pub theta_deg: f64,
    pub phi_deg: f64,
}

impl AngularLocation {
    pub const BROADSIDE: AngularLocation = AngularLocation { theta_deg: 0.0, phi_deg: 0.0 };

    pub fn new(theta_deg: f64, phi_deg: f64) -> Result<Self, GeometryError> {
        if !(theta_deg.abs() < 90.0 && phi_deg.abs() < 90.0) {
            return Err(GeometryError::OutsideFrontHalfSpace { theta_deg, phi_deg });
        }
        Ok(Self { theta_deg, phi_deg })
    }

    /// Unit vector from the array toward the source.
    ///
    /// Its x and z components are the ones that give the per-sample phase
    /// increments of [`spatial_frequencies`] (`ω_x ∝ cos θ sin φ`,
    /// `ω_z ∝ -sin θ`), so positive θ points toward -z.
    pub fn direction(&self) -> [f64; 3] {
        let (t, p) = (self.theta_deg.to_radians(), self.phi_deg.to_radians());
        [t.cos() * p.sin(), t.cos() * p.cos(), -t.sin()]
    }

    /// Euclidean distance in the (θ, φ) plane with each axis difference
    /// wrapped to (-180°, 180°].
    pub fn angular_distance(&self, other: &AngularLocation) -> f64 {
        wrap_degrees(self.theta_deg - other.theta_deg).hypot(wrap_degrees(self.phi_deg - other.phi_deg))
    }
}

/// Wrap an angle difference into (-180°, 180°].
pub fn wrap_degrees(d: f64) -> f64 {
    let r = d.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

/// Per-sample phase increments of a plane wave across the array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialFrequencyPair {
    /// radians per row step
    pub omega_z: f64,
    /// radians per column step
    pub omega_x: f64,
}

impl SpatialFrequencyPair {
    pub fn new(omega_z: f64, omega_x: f64) -> Self {
        Self { omega_z, omega_x }
    }

    /// `(ω_x/ω_x,max)² + (ω_z/ω_z,max)²`; at most 1 for propagating waves.
    pub fn normalized_radius_sq(&self, geom: &ArrayGeometry) -> f64 {
        let u = self.omega_x / geom.max_omega_x();
        let v = self.omega_z / geom.max_omega_z();
        u * u + v * v
    }

    pub fn is_propagating(&self, geom: &ArrayGeometry) -> bool {
        self.normalized_radius_sq(geom) <= 1.0
    }
}

/// All element positions, indexed `[m-1, n-1]`.
pub fn element_positions(geom: &ArrayGeometry) -> Array2<Position> {
    Array2::from_shape_fn(geom.shape(), |(i, j)| geom.element_position(i + 1, j + 1))
}

pub fn spatial_frequencies(loc: AngularLocation, geom: &ArrayGeometry) -> SpatialFrequencyPair {
    let (t, p) = (loc.theta_deg.to_radians(), loc.phi_deg.to_radians());
    SpatialFrequencyPair {
        omega_x: geom.max_omega_x() * t.cos() * p.sin(),
        omega_z: -geom.max_omega_z() * t.sin(),
    }
}

/// Inverse of [`spatial_frequencies`].
///
/// Grazing solutions (an arcsine argument of exactly ±1) are rejected along
/// with evanescent ones since they have no front-half-space direction.
pub fn angles_from_frequencies(
    freqs: SpatialFrequencyPair,
    geom: &ArrayGeometry,
) -> Result<AngularLocation, GeometryError> {
    let infeasible = || GeometryError::InfeasibleFrequency {
        omega_z: freqs.omega_z,
        omega_x: freqs.omega_x,
    };
    let sin_theta = -freqs.omega_z / geom.max_omega_z();
    if !(sin_theta.abs() < 1.0) {
        return Err(infeasible());
    }
    let theta = sin_theta.asin();
    let sin_phi = freqs.omega_x / (geom.max_omega_x() * theta.cos());
    if !(sin_phi.abs() < 1.0) {
        return Err(infeasible());
    }
    // `+ 0.0` folds -0.0 into 0.0
    Ok(AngularLocation {
        theta_deg: theta.to_degrees() + 0.0,
        phi_deg: sin_phi.asin().to_degrees() + 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn panel() -> ArrayGeometry {
        ArrayGeometry::reference_panel()
    }

    #[test]
    fn single_element_sits_at_origin() {
        let g = ArrayGeometry::new(1, 1, 0.05, 0.07, 1_000_000_000).unwrap();
        assert_eq!(element_positions(&g)[[0, 0]], Position::ORIGIN);
    }

    #[test]
    fn two_by_two_is_symmetric() {
        let g = ArrayGeometry::new(2, 2, 0.02, 0.02, 3_500_000_000).unwrap();
        for p in element_positions(&g).iter() {
            assert!((p.x.abs() - 0.01).abs() < 1e-15);
            assert!((p.z.abs() - 0.01).abs() < 1e-15);
            assert_eq!(p.y, 0.0);
        }
    }

    #[test]
    fn reference_panel_extent() {
        let pos = element_positions(&panel());
        let xs: Vec<f64> = pos.iter().map(|p| p.x).collect();
        let max = xs.iter().cloned().fold(f64::MIN, f64::max);
        let min = xs.iter().cloned().fold(f64::MAX, f64::min);
        assert!((max - 0.31).abs() < 1e-12);
        assert!((min + 0.31).abs() < 1e-12);
        assert!(max - min < 0.64);
        assert!(pos.iter().all(|p| p.y == 0.0));
    }

    #[test]
    fn reference_panel_wavelength() {
        let g = panel();
        assert!((g.wavelength() - 0.085_655).abs() < 1e-6);
        assert!((g.d_x() / g.wavelength() - 0.233_495).abs() < 1e-6);
    }

    #[test]
    fn forward_map_examples() {
        let g = panel();
        let f = spatial_frequencies(AngularLocation::BROADSIDE, &g);
        assert_eq!((f.omega_z, f.omega_x), (0.0, 0.0));

        // 2π · 0.2334949 · sin 30°
        let f = spatial_frequencies(AngularLocation::new(0.0, 30.0).unwrap(), &g);
        assert!((f.omega_x - 0.733_545_76).abs() < 1e-7, "{}", f.omega_x);
        assert_eq!(f.omega_z, 0.0);

        let f = spatial_frequencies(AngularLocation::new(15.0, 0.0).unwrap(), &g);
        assert!((f.omega_z + 0.379_711_23).abs() < 1e-7, "{}", f.omega_z);
        assert_eq!(f.omega_x, 0.0);
    }

    #[test]
    fn inverse_map_examples() {
        let g = panel();
        let a = angles_from_frequencies(SpatialFrequencyPair::new(0.0, 0.0), &g).unwrap();
        assert_eq!((a.theta_deg, a.phi_deg), (0.0, 0.0));

        let a = angles_from_frequencies(SpatialFrequencyPair::new(0.0, 0.733_545_757_683_088_6), &g).unwrap();
        assert!(a.theta_deg.abs() < 1e-12);
        assert!((a.phi_deg - 30.0).abs() < 1e-9);

        let err = angles_from_frequencies(SpatialFrequencyPair::new(2.0, 2.0), &g).unwrap_err();
        assert!(matches!(err, GeometryError::InfeasibleFrequency { .. }));
    }

    #[test]
    fn rejects_back_half_space() {
        assert!(AngularLocation::new(90.0, 0.0).is_err());
        assert!(AngularLocation::new(0.0, -95.0).is_err());
        assert!(AngularLocation::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn wrap_degrees_range() {
        assert_eq!(wrap_degrees(190.0), -170.0);
        assert_eq!(wrap_degrees(-180.0), 180.0);
        assert_eq!(wrap_degrees(360.0), 0.0);
    }

    #[test]
    fn direction_matches_far_position() {
        let loc = AngularLocation::new(-20.0, 35.0).unwrap();
        let p = Position::from_direction(loc, 3.0);
        assert!((p.norm() - 3.0).abs() < 1e-12);
        assert!(p.y > 0.0);
    }

    proptest! {
        #[test]
        fn round_trip(theta in -80.0f64..80.0, phi in -80.0f64..80.0, d in 0.005f64..0.06) {
            let g = ArrayGeometry::new(8, 8, d, d * 1.3, 3_500_000_000).unwrap();
            let loc = AngularLocation::new(theta, phi).unwrap();
            let f = spatial_frequencies(loc, &g);
            prop_assert!(f.is_propagating(&g));
            let back = angles_from_frequencies(f, &g).unwrap();
            prop_assert!((back.theta_deg - theta).abs() < 1e-9);
            prop_assert!((back.phi_deg - phi).abs() < 1e-9);
        }

        #[test]
        fn sign_convention(theta in -80.0f64..79.0, phi in -80.0f64..79.0, step in 0.01f64..1.0) {
            let g = panel();
            let a = spatial_frequencies(AngularLocation::new(theta, 0.0).unwrap(), &g);
            let b = spatial_frequencies(AngularLocation::new(theta + step, 0.0).unwrap(), &g);
            prop_assert!(b.omega_z < a.omega_z);
            let a = spatial_frequencies(AngularLocation::new(0.0, phi).unwrap(), &g);
            let b = spatial_frequencies(AngularLocation::new(0.0, phi + step).unwrap(), &g);
            prop_assert!(b.omega_x > a.omega_x);
        }
    }
}
