//! Stochastic geometric scene generator standing in for ray tracing.

use std::f64::consts::PI;

use rand::Rng;

use super::{los_gain, nlos_gain, PathComponent, PathKind, SceneRealization};
use crate::config::{SceneParams, SystemConfig, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

fn open_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let theta = rng.random_range(0.0..PI);
        if theta > 0.0 {
            return theta;
        }
    }
}

/// Draws one user drop: `l_far` LOS plane-wave paths with ranges in the LOS
/// interval and `l_near` single-bounce scatterers inside the Rayleigh
/// distance. The user sits at the first LOS path (or at a fresh draw when
/// there is none); each scatterer's first leg runs from the user to it.
pub fn generate_scene<R: Rng + ?Sized>(
    config: &SystemConfig,
    params: &SceneParams,
    rng: &mut R,
) -> Result<SceneRealization> {
    params.validate()?;
    config.validate().map_err(|e| Error::invalid(e.to_string()))?;
    let fc = config.carrier_freq_hz;
    let [los_lo, los_hi] = params.los_range_m;
    let draw_los_range = |rng: &mut R| {
        if los_hi > los_lo {
            rng.random_range(los_lo..=los_hi)
        } else {
            los_lo
        }
    };

    let mut paths = Vec::with_capacity(params.l_far + params.l_near);
    for _ in 0..params.l_far {
        let angle_rad = open_angle(rng);
        let range = draw_los_range(rng);
        let delay_s = range / SPEED_OF_LIGHT;
        paths.push(PathComponent {
            kind: PathKind::FarLos,
            gain: los_gain(fc, range, &params.absorption, delay_s)?,
            angle_rad,
            distance_m: range,
            delay_s,
            scatter_leg1_m: 0.0,
            scatter_leg2_m: 0.0,
        });
    }

    let (user_angle, user_range) = match paths.first() {
        Some(p) => (p.angle_rad, p.distance_m),
        None => {
            let angle = open_angle(rng);
            (angle, draw_los_range(rng))
        }
    };

    let d_r = config.rayleigh_distance_m();
    let near_hi = params.near_range_fraction * d_r;
    let near_lo = near_hi / 10.0;
    for _ in 0..params.l_near {
        let angle_rad = open_angle(rng);
        let r = rng.random_range(near_lo..near_hi);
        let leg1 = (user_range * user_range + r * r
            - 2.0 * user_range * r * (user_angle - angle_rad).cos())
        .max(0.0)
        .sqrt();
        if !(leg1 > 0.0) {
            return Err(Error::invalid("scatterer coincides with the user position"));
        }
        let delay_s = (leg1 + r) / SPEED_OF_LIGHT;
        paths.push(PathComponent {
            kind: PathKind::NearNlos,
            gain: nlos_gain(fc, leg1, r, &params.absorption, &params.material, delay_s)?,
            angle_rad,
            distance_m: r,
            delay_s,
            scatter_leg1_m: leg1,
            scatter_leg2_m: r,
        });
    }

    SceneRealization::new(paths, fc, params.material, params.absorption.clone())
}
