//! Positions, departure angles, planar-array steering vectors and the
//! UAV-to-HAPS backhaul phase profiles.
//!
//! Everything here is a pure function of geometry. Angles follow a
//! nadir-referenced convention: `theta` is measured from the downward
//! vertical at the apex (0 = straight down), `phi` is the azimuth of the
//! ground point as seen from above, `atan2(dy, dx)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Uniform planar array layout. `rows` elements along x, `cols` along y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub rows: usize,
    pub cols: usize,
    /// Inter-element spacing in wavelengths.
    #[serde(default = "default_spacing")]
    pub spacing_over_lambda: f64,
}

fn default_spacing() -> f64 {
    0.5
}

impl ArrayGeometry {
    pub fn new(rows: usize, cols: usize, spacing_over_lambda: f64) -> Result<Self> {
        let geom = Self {
            rows,
            cols,
            spacing_over_lambda,
        };
        geom.validate()?;
        Ok(geom)
    }

    /// Half-wavelength spaced square-ish array.
    pub fn half_wave(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            spacing_over_lambda: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(IsacError::Config(format!(
                "array must have at least one row and column, got {}x{}",
                self.rows, self.cols
            )));
        }
        if !(self.spacing_over_lambda > 0.0) || !self.spacing_over_lambda.is_finite() {
            return Err(IsacError::Config(format!(
                "array spacing must be positive, got {}",
                self.spacing_over_lambda
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position3 {
    pub x: f64,
    pub y: f64,
    /// Altitude above ground, meters.
    pub z: f64,
}

impl Position3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn ground(x: f64, y: f64) -> Self {
        Self { x, y, z: 0.0 }
    }

    pub fn is_valid(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite() && self.z >= 0.0
    }

    pub fn translated(&self, dx: f64, dy: f64, dz: f64) -> Self {
        Self::new(self.x + dx, self.y + dy, self.z + dz)
    }

    pub fn horizontal_distance(&self, other: &Position3) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleOfDeparture {
    /// Vertical angle from nadir, in `[0, pi/2]`.
    pub theta: f64,
    /// Horizontal angle, in `[-pi, pi]`.
    pub phi: f64,
}

impl AngleOfDeparture {
    pub const BROADSIDE: AngleOfDeparture = AngleOfDeparture {
        theta: 0.0,
        phi: 0.0,
    };

    /// Direction cosines `(sin theta cos phi, sin theta sin phi)`.
    #[inline]
    pub fn direction_cosines(&self) -> (f64, f64) {
        let s = self.theta.sin();
        (s * self.phi.cos(), s * self.phi.sin())
    }
}

/// Unit-modulus phase profile of a planar array toward one direction.
///
/// Entries are stored flat in x-major order: element `(g_w, g_l)` lives at
/// `g_w * cols + g_l`, i.e. the vector is `alpha ⊗ xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub entries: Vec<Complex64>,
    pub geometry: ArrayGeometry,
}

impl SteeringVector {
    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `self^H other`.
    pub fn inner(&self, other: &[Complex64]) -> Complex64 {
        inner(&self.entries, other)
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.entries
    }
}

/// Hermitian inner product `a^H b`.
#[inline]
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

/// Squared Euclidean norm of a complex vector.
#[inline]
pub fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Departure angles of the ray from `apex` down to `ground`.
///
/// A ground point directly below the apex maps to `theta = 0, phi = 0`.
pub fn aod_from_positions(apex: Position3, ground: Position3) -> AngleOfDeparture {
    let dx = ground.x - apex.x;
    let dy = ground.y - apex.y;
    let r = dx.hypot(dy);
    if r == 0.0 {
        return AngleOfDeparture::BROADSIDE;
    }
    let dz = apex.z - ground.z;
    AngleOfDeparture {
        theta: r.atan2(dz),
        phi: dy.atan2(dx),
    }
}

/// Linear-array phase profile `[1, e^{-j u}, e^{-j 2u}, ...]` with
/// `u = 2 pi spacing * cosine`.
fn linear_profile(n: usize, spacing_over_lambda: f64, cosine: f64, sign: f64) -> Vec<Complex64> {
    let step = sign * 2.0 * PI * spacing_over_lambda * cosine;
    (0..n)
        .map(|i| Complex64::from_polar(1.0, step * i as f64))
        .collect()
}

/// Kronecker product of two vectors, first argument major.
pub fn kron(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

/// UPA steering vector `alpha(theta, phi) ⊗ xi(theta, phi)`.
pub fn steering_vector(geom: ArrayGeometry, aod: AngleOfDeparture) -> SteeringVector {
    let (u, v) = aod.direction_cosines();
    let alpha = linear_profile(geom.rows, geom.spacing_over_lambda, u, -1.0);
    let xi = linear_profile(geom.cols, geom.spacing_over_lambda, v, -1.0);
    SteeringVector {
        entries: kron(&alpha, &xi),
        geometry: geom,
    }
}

/// Steering vector from `apex` toward a ground point.
pub fn steering_toward(geom: ArrayGeometry, apex: Position3, ground: Position3) -> SteeringVector {
    steering_vector(geom, aod_from_positions(apex, ground))
}

/// 3-D Euclidean distance.
#[inline]
pub fn distance(a: Position3, b: Position3) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dz = a.z - b.z;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

#[inline]
pub fn wavelength(carrier_freq: f64) -> f64 {
    SPEED_OF_LIGHT / carrier_freq
}

/// Phase profiles on the UAV-to-HAPS link.
#[derive(Debug, Clone)]
pub struct HapsPhaseVectors {
    /// UAV transmit phases `b_m`, length G, including the common
    /// propagation phase `exp(j 2 pi d_m / lambda)`.
    pub uav: SteeringVector,
    /// HAPS receive phases `c_m`, length S.
    pub haps: SteeringVector,
    /// Elevation/azimuth of the UAV as seen from the HAPS.
    pub aod: AngleOfDeparture,
    /// Reference-element distance `d_m`.
    pub distance: f64,
}

/// Backhaul phase vectors for one UAV. Angles are taken with the HAPS as
/// apex. The propagation phase is applied as one common factor on `b`.
pub fn haps_phase_vectors(
    uav_geom: ArrayGeometry,
    haps_geom: ArrayGeometry,
    uav: Position3,
    haps: Position3,
    carrier_freq: f64,
) -> HapsPhaseVectors {
    let aod = aod_from_positions(haps, uav);
    let (u, v) = aod.direction_cosines();
    let d_m = distance(uav, haps);
    // d_m / lambda is ~1e7 at backhaul ranges; keep only the fractional turn.
    let turns = (d_m / wavelength(carrier_freq)).fract();
    let common = Complex64::from_polar(1.0, 2.0 * PI * turns);

    let alpha_b = linear_profile(uav_geom.rows, uav_geom.spacing_over_lambda, u, 1.0);
    let xi_b = linear_profile(uav_geom.cols, uav_geom.spacing_over_lambda, v, 1.0);
    let mut b = kron(&alpha_b, &xi_b);
    for e in b.iter_mut() {
        *e *= common;
    }

    let alpha_c = linear_profile(haps_geom.rows, haps_geom.spacing_over_lambda, u, 1.0);
    let xi_c = linear_profile(haps_geom.cols, haps_geom.spacing_over_lambda, v, 1.0);

    HapsPhaseVectors {
        uav: SteeringVector {
            entries: b,
            geometry: uav_geom,
        },
        haps: SteeringVector {
            entries: kron(&alpha_c, &xi_c),
            geometry: haps_geom,
        },
        aod,
        distance: d_m,
    }
}

/// Free-space amplitude gain `lambda / (4 pi d)` of the backhaul link.
pub fn haps_pathloss_amplitude(d_m: f64, carrier_freq: f64) -> Result<f64> {
    if !(d_m > 0.0) {
        return Err(IsacError::Domain(format!(
            "backhaul distance must be positive, got {d_m}"
        )));
    }
    if !(carrier_freq > 0.0) {
        return Err(IsacError::Domain(format!(
            "carrier frequency must be positive, got {carrier_freq}"
        )));
    }
    Ok(wavelength(carrier_freq) / (4.0 * PI * d_m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn aod_examples() {
        let uav = Position3::new(0.0, 0.0, 40.0);
        let a = aod_from_positions(uav, Position3::ground(0.0, 0.0));
        assert_eq!(a, AngleOfDeparture::BROADSIDE);

        let a = aod_from_positions(uav, Position3::ground(40.0, 0.0));
        assert_relative_eq!(a.theta, PI / 4.0, epsilon = 1e-12);
        assert_relative_eq!(a.phi, 0.0, epsilon = 1e-12);

        let a = aod_from_positions(uav, Position3::ground(0.0, 30.0));
        assert_relative_eq!(a.theta, 0.643_501_108_793_284_4, epsilon = 1e-12);
        assert_relative_eq!(a.phi, PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn broadside_is_all_ones() {
        let sv = steering_vector(ArrayGeometry::half_wave(4, 4), AngleOfDeparture::BROADSIDE);
        assert_eq!(sv.len(), 16);
        for e in &sv.entries {
            assert_relative_eq!(e.re, 1.0, epsilon = 1e-15);
            assert_relative_eq!(e.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn endfire_two_element() {
        let aod = AngleOfDeparture {
            theta: PI / 2.0,
            phi: 0.0,
        };
        let sv = steering_vector(ArrayGeometry::half_wave(2, 1), aod);
        assert_relative_eq!(sv.entries[0].re, 1.0, epsilon = 1e-12);
        assert_relative_eq!(sv.entries[1].re, -1.0, epsilon = 1e-12);
        assert!(sv.entries[1].im.abs() < 1e-12);
    }

    #[test]
    fn distance_examples() {
        let uav = Position3::new(0.0, 0.0, 40.0);
        assert_eq!(distance(uav, Position3::ground(0.0, 0.0)), 40.0);
        assert_relative_eq!(distance(uav, Position3::ground(30.0, 0.0)), 50.0);
        let d = distance(
            Position3::new(0.0, 0.0, 20_000.0),
            Position3::new(500.0, 500.0, 40.0),
        );
        assert_relative_eq!(d, 19_972.521_122_782_67, max_relative = 1e-12);
    }

    #[test]
    fn pathloss_examples() {
        let d = haps_pathloss_amplitude(19_960.0, 120e9).unwrap();
        assert_relative_eq!(d, 9.960_222_860_798_56e-9, max_relative = 1e-9);
        let half = haps_pathloss_amplitude(9_980.0, 120e9).unwrap();
        assert_relative_eq!(half, 2.0 * d, max_relative = 1e-12);
        let f2 = haps_pathloss_amplitude(19_960.0, 240e9).unwrap();
        assert_relative_eq!(f2, d / 2.0, max_relative = 1e-12);
        assert!(matches!(
            haps_pathloss_amplitude(0.0, 120e9),
            Err(IsacError::Domain(_))
        ));
    }

    #[test]
    fn haps_vectors_below_haps() {
        let hv = haps_phase_vectors(
            ArrayGeometry::half_wave(4, 4),
            ArrayGeometry::half_wave(20, 20),
            Position3::new(500.0, 500.0, 40.0),
            Position3::new(500.0, 500.0, 20_000.0),
            120e9,
        );
        assert_eq!(hv.aod.theta, 0.0);
        let first = hv.uav.entries[0];
        for e in &hv.uav.entries {
            assert_relative_eq!((e / first).re, 1.0, epsilon = 1e-12);
        }
        for c in &hv.haps.entries {
            assert_relative_eq!(c.re, 1.0, epsilon = 1e-12);
        }
        assert_relative_eq!(norm_sqr(&hv.haps.entries), 400.0, epsilon = 1e-9);
    }

    #[test]
    fn haps_vectors_are_phase_only() {
        let hv = haps_phase_vectors(
            ArrayGeometry::half_wave(4, 4),
            ArrayGeometry::half_wave(20, 20),
            Position3::new(130.0, 870.0, 40.0),
            Position3::new(500.0, 500.0, 20_000.0),
            120e9,
        );
        for e in hv.uav.entries.iter().chain(&hv.haps.entries) {
            assert_relative_eq!(e.norm(), 1.0, epsilon = 1e-12);
        }
        assert_relative_eq!(inner(&hv.haps.entries, &hv.haps.entries).re, 400.0, epsilon = 1e-9);
    }

    #[test]
    fn invalid_geometry_rejected() {
        assert!(ArrayGeometry::new(0, 4, 0.5).is_err());
        assert!(ArrayGeometry::new(4, 4, 0.0).is_err());
        assert!(ArrayGeometry::new(4, 4, 0.5).is_ok());
    }

    fn arb_geom() -> impl Strategy<Value = ArrayGeometry> {
        (1usize..9, 1usize..9, 0.1f64..1.5).prop_map(|(r, c, s)| ArrayGeometry {
            rows: r,
            cols: c,
            spacing_over_lambda: s,
        })
    }

    fn arb_aod() -> impl Strategy<Value = AngleOfDeparture> {
        (0.0f64..=PI / 2.0, -PI..=PI).prop_map(|(theta, phi)| AngleOfDeparture { theta, phi })
    }

    proptest! {
        #[test]
        fn self_inner_product_is_element_count(g in arb_geom(), a in arb_aod()) {
            let sv = steering_vector(g, a);
            let n = g.len() as f64;
            prop_assert!((sv.inner(&sv.entries).re - n).abs() / n < 1e-9);
            for e in &sv.entries {
                prop_assert!((e.norm() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn kronecker_ordering(g in arb_geom(), a in arb_aod()) {
            let sv = steering_vector(g, a);
            let (u, v) = a.direction_cosines();
            let two_pi_d = 2.0 * PI * g.spacing_over_lambda;
            for gw in 0..g.rows {
                for gl in 0..g.cols {
                    let alpha = Complex64::from_polar(1.0, -two_pi_d * gw as f64 * u);
                    let xi = Complex64::from_polar(1.0, -two_pi_d * gl as f64 * v);
                    let e = sv.entries[gw * g.cols + gl];
                    prop_assert!((e - alpha * xi).norm() < 1e-12);
                }
            }
        }

        #[test]
        fn phase_wraps_every_cycle(rows in 1usize..8, a in arb_aod()) {
            // spacing * sin(theta) cos(phi) shifted by one full cycle.
            let (u, _) = a.direction_cosines();
            prop_assume!(u.abs() > 0.05);
            let g1 = ArrayGeometry { rows, cols: 1, spacing_over_lambda: 0.5 };
            let g2 = ArrayGeometry { rows, cols: 1, spacing_over_lambda: 0.5 + 1.0 / u };
            let a1 = steering_vector(g1, a);
            let a2 = steering_vector(g2, AngleOfDeparture { theta: a.theta, phi: a.phi });
            for (x, y) in a1.entries.iter().zip(&a2.entries) {
                prop_assert!((x - y).norm() < 1e-9);
            }
        }

        #[test]
        fn translation_invariance(
            ux in -500.0f64..500.0, uy in -500.0f64..500.0, h in 10.0f64..200.0,
            gx in -500.0f64..500.0, gy in -500.0f64..500.0,
            tx in -1e3f64..1e3, ty in -1e3f64..1e3,
        ) {
            let g = ArrayGeometry::half_wave(4, 4);
            let uav = Position3::new(ux, uy, h);
            let gp = Position3::ground(gx, gy);
            let a = steering_toward(g, uav, gp);
            let b = steering_toward(g, uav.translated(tx, ty, 0.0), gp.translated(tx, ty, 0.0));
            for (x, y) in a.entries.iter().zip(&b.entries) {
                prop_assert!((x - y).norm() < 1e-9);
            }
        }
    }
}
