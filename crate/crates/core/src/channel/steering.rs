//! ULA steering vectors.
//!
//! Element `z` (1-based) sits at `Delta_z * d` from the array centre with
//! `Delta_z = (2z - N - 1) / 2`. Both vectors share one phase convention:
//! entries are `exp(-j phi)` referenced to the first element, and the
//! near-field vector is oriented so that it converges elementwise to the
//! far-field vector as the source range grows.

use std::f64::consts::{PI, TAU};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};

fn check_angle(angle_rad: f64) -> Result<()> {
    if !angle_rad.is_finite() {
        return Err(Error::invalid(format!("angle must be finite (got {angle_rad})")));
    }
    if !(angle_rad > 0.0 && angle_rad < PI) {
        return Err(Error::invalid(format!(
            "angle must lie strictly inside (0, pi) (got {angle_rad})"
        )));
    }
    Ok(())
}

/// Plane-wave response `(1/sqrt N) exp(-j 2 pi (d/lambda) cos(theta) z)`, `z = 0..N`.
pub fn far_steering(
    angle_rad: f64,
    n_antennas: usize,
    spacing_over_lambda: f64,
) -> Result<DVector<Complex64>> {
    check_angle(angle_rad)?;
    if n_antennas == 0 {
        return Err(Error::invalid("n_antennas must be >= 1"));
    }
    if !spacing_over_lambda.is_finite() {
        return Err(Error::invalid("spacing_over_lambda must be finite"));
    }
    let scale = 1.0 / (n_antennas as f64).sqrt();
    let step = -TAU * spacing_over_lambda * angle_rad.cos();
    Ok(DVector::from_fn(n_antennas, |z, _| {
        Complex64::from_polar(scale, step * z as f64)
    }))
}

/// Offset of element `z` (1-based) from the array centre, in units of `d`.
pub fn element_offset(element_index: usize, n_antennas: usize) -> f64 {
    (2.0 * element_index as f64 - n_antennas as f64 - 1.0) / 2.0
}

/// Distance from a source at `(r, theta)` (relative to the array centre) to
/// element `z`: `sqrt(r^2 + Delta_z^2 d^2 - 2 r Delta_z d cos(theta))`.
pub fn element_distance(
    r_m: f64,
    angle_rad: f64,
    element_index: usize,
    n_antennas: usize,
    spacing_m: f64,
) -> Result<f64> {
    if !(r_m.is_finite() && r_m > 0.0) {
        return Err(Error::invalid(format!("range must be > 0 (got {r_m})")));
    }
    if !angle_rad.is_finite() {
        return Err(Error::invalid(format!("angle must be finite (got {angle_rad})")));
    }
    if element_index == 0 || element_index > n_antennas {
        return Err(Error::invalid(format!(
            "element index {element_index} outside 1..={n_antennas}"
        )));
    }
    let offset = element_offset(element_index, n_antennas) * spacing_m;
    let discriminant = r_m * r_m + offset * offset - 2.0 * r_m * offset * angle_rad.cos();
    if !(discriminant > 0.0) {
        return Err(Error::DegenerateGeometry {
            element: element_index,
            range_m: r_m,
            angle_rad,
            discriminant,
        });
    }
    Ok(discriminant.sqrt())
}

/// Spherical-wave response of a source at range `r_m` and angle `angle_rad`.
///
/// Entry `z` is `(1/sqrt N) exp(-j (2 pi / lambda) (rho_z - rho_1))` where
/// `rho_z` is the exact element distance measured along the same axis
/// orientation as [`far_steering`], so the vector tends to
/// `far_steering(theta, N, d / lambda)` as `r -> inf`.
pub fn near_steering(
    angle_rad: f64,
    r_m: f64,
    n_antennas: usize,
    spacing_m: f64,
    lambda_m: f64,
) -> Result<DVector<Complex64>> {
    check_angle(angle_rad)?;
    if n_antennas == 0 {
        return Err(Error::invalid("n_antennas must be >= 1"));
    }
    if !(lambda_m.is_finite() && lambda_m > 0.0) {
        return Err(Error::invalid(format!("wavelength must be > 0 (got {lambda_m})")));
    }
    // Mirrored index: element z sees the source like element N + 1 - z does
    // under the centre-referenced law of cosines.
    let rho = |z: usize| element_distance(r_m, angle_rad, n_antennas + 1 - z, n_antennas, spacing_m);
    let reference = rho(1)?;
    let k0 = TAU / lambda_m;
    let scale = 1.0 / (n_antennas as f64).sqrt();
    let cos = angle_rad.cos();
    let x1 = element_offset(1, n_antennas) * spacing_m;
    let mut out = DVector::zeros(n_antennas);
    for z in 1..=n_antennas {
        // rho_z - rho_1 = (rho_z^2 - rho_1^2) / (rho_z + rho_1); the squared
        // difference has no r^2 term, so this stays exact for r >> aperture.
        let x = element_offset(z, n_antennas) * spacing_m;
        let squared_diff = (x - x1) * (x + x1 + 2.0 * r_m * cos);
        let delta = squared_diff / (rho(z)? + reference);
        out[z - 1] = Complex64::from_polar(scale, -k0 * delta);
    }
    Ok(out)
}
