//! THz LOS / NLOS complex path gains with molecular absorption and rough
//! surface reflection.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::config::{AbsorptionTable, MaterialParams, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

fn check_freq(freq_hz: f64) -> Result<()> {
    if !(freq_hz.is_finite() && freq_hz > 0.0) {
        return Err(Error::invalid(format!("frequency must be > 0 (got {freq_hz})")));
    }
    Ok(())
}

/// Spreading loss, half-power absorption and propagation phase over a path of
/// total length `length_m`.
fn free_space(freq_hz: f64, length_m: f64, absorption: &AbsorptionTable, delay_s: f64) -> Complex64 {
    let spreading = SPEED_OF_LIGHT / (4.0 * PI * freq_hz * length_m);
    let k = absorption.lookup(freq_hz);
    let magnitude = spreading * (-k * length_m / 2.0).exp();
    Complex64::from_polar(magnitude, -TAU * freq_hz * delay_s)
}

/// LOS gain `c / (4 pi f r) * exp(-k(f) r / 2) * exp(-j 2 pi f tau)`.
pub fn los_gain(
    freq_hz: f64,
    range_m: f64,
    absorption: &AbsorptionTable,
    delay_s: f64,
) -> Result<Complex64> {
    check_freq(freq_hz)?;
    if !(range_m.is_finite() && range_m > 0.0) {
        return Err(Error::invalid(format!("range must be > 0 (got {range_m})")));
    }
    Ok(free_space(freq_hz, range_m, absorption, delay_s))
}

/// Fresnel coefficient `-exp(-2 cos(psi) / sqrt(eta^2 - 1))`.
pub fn fresnel_coefficient(material: &MaterialParams) -> f64 {
    let eta = material.refractive_index;
    -(-2.0 * material.incidence_angle_rad.cos() / (eta * eta - 1.0).sqrt()).exp()
}

/// Rayleigh roughness factor `exp(-8 pi^2 f^2 sigma^2 cos^2(psi) / c^2)`.
pub fn roughness_factor(freq_hz: f64, material: &MaterialParams) -> f64 {
    let cos = material.incidence_angle_rad.cos();
    let sigma = material.roughness_std_m;
    (-8.0 * PI * PI * freq_hz * freq_hz * sigma * sigma * cos * cos
        / (SPEED_OF_LIGHT * SPEED_OF_LIGHT))
        .exp()
}

/// Reflection loss `R(f) = gamma * rho`.
pub fn reflection_coefficient(freq_hz: f64, material: &MaterialParams) -> f64 {
    fresnel_coefficient(material) * roughness_factor(freq_hz, material)
}

/// Single-bounce NLOS gain over legs `leg1_m` (user to scatterer) and
/// `leg2_m` (scatterer to base station).
pub fn nlos_gain(
    freq_hz: f64,
    leg1_m: f64,
    leg2_m: f64,
    absorption: &AbsorptionTable,
    material: &MaterialParams,
    delay_s: f64,
) -> Result<Complex64> {
    check_freq(freq_hz)?;
    material.validate()?;
    if !(leg1_m.is_finite() && leg1_m > 0.0 && leg2_m.is_finite() && leg2_m > 0.0) {
        return Err(Error::invalid(format!(
            "NLOS legs must be > 0 (got {leg1_m}, {leg2_m})"
        )));
    }
    let total = leg1_m + leg2_m;
    Ok(free_space(freq_hz, total, absorption, delay_s) * reflection_coefficient(freq_hz, material))
}
