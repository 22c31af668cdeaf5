//! Hybrid-field channel model: far-field LOS plane waves plus near-field
//! NLOS spherical waves on a uniform linear array.

mod pathloss;
mod scene;
mod steering;

pub use pathloss::{
    fresnel_coefficient, los_gain, nlos_gain, reflection_coefficient, roughness_factor,
};
pub use scene::generate_scene;
pub use steering::{element_distance, element_offset, far_steering, near_steering};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{AbsorptionTable, MaterialParams, SystemConfig, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathKind {
    FarLos,
    NearNlos,
}

/// One propagation path of a scene. `gain` is referenced to the carrier;
/// per-subcarrier gains are scaled from it by the frequency response of the
/// path's geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathComponent {
    pub kind: PathKind,
    pub gain: Complex64,
    pub angle_rad: f64,
    /// Near-field: scatterer range from the array centre. Far-field: LOS range.
    pub distance_m: f64,
    pub delay_s: f64,
    pub scatter_leg1_m: f64,
    pub scatter_leg2_m: f64,
}

impl PathComponent {
    /// Total propagation length entering spreading loss and absorption.
    pub fn path_length_m(&self) -> f64 {
        match self.kind {
            PathKind::FarLos => self.distance_m,
            PathKind::NearNlos => self.scatter_leg1_m + self.scatter_leg2_m,
        }
    }
}

/// A user drop: the set of paths plus the propagation environment needed to
/// evaluate them away from the carrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRealization {
    pub paths: Vec<PathComponent>,
    pub l_far: usize,
    pub l_near: usize,
    pub reference_freq_hz: f64,
    pub material: MaterialParams,
    pub absorption: AbsorptionTable,
}

impl SceneRealization {
    /// Builds a scene from explicit paths; counts are derived from the kinds.
    pub fn new(
        paths: Vec<PathComponent>,
        reference_freq_hz: f64,
        material: MaterialParams,
        absorption: AbsorptionTable,
    ) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::invalid("scene must contain at least one path"));
        }
        if let Some(p) = paths.iter().find(|p| !(p.gain.norm() > 0.0)) {
            return Err(Error::invalid(format!("path gain must be nonzero (got {})", p.gain)));
        }
        let l_far = paths.iter().filter(|p| p.kind == PathKind::FarLos).count();
        Ok(Self {
            l_near: paths.len() - l_far,
            l_far,
            paths,
            reference_freq_hz,
            material,
            absorption,
        })
    }

    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }

    /// Multiplies every path gain by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for p in &mut out.paths {
            p.gain *= factor;
        }
        out
    }

    fn spectral_response(&self, path: &PathComponent, freq_hz: f64) -> Result<Complex64> {
        match path.kind {
            PathKind::FarLos => los_gain(freq_hz, path.distance_m, &self.absorption, path.delay_s),
            PathKind::NearNlos => nlos_gain(
                freq_hz,
                path.scatter_leg1_m,
                path.scatter_leg2_m,
                &self.absorption,
                &self.material,
                path.delay_s,
            ),
        }
    }

    /// Gain of `path` at `freq_hz`, i.e. `gain * response(f) / response(f_ref)`.
    pub fn gain_at(&self, path: &PathComponent, freq_hz: f64) -> Result<Complex64> {
        if freq_hz == self.reference_freq_hz {
            return Ok(path.gain);
        }
        let reference = self.spectral_response(path, self.reference_freq_hz)?;
        if reference.norm() == 0.0 {
            return Err(Error::invalid("path response vanishes at the reference frequency"));
        }
        Ok(path.gain * self.spectral_response(path, freq_hz)? / reference)
    }
}

/// Antenna-domain channel, one column per subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridChannel {
    pub coeffs: CMatrix,
    pub scene: SceneRealization,
    pub config: SystemConfig,
}

/// `h_m = sqrt(N / L) (sum_far alpha a(theta) + sum_near alpha b(theta, r))`
/// with gains and steering evaluated at each subcarrier frequency.
pub fn assemble_channel(scene: &SceneRealization, config: &SystemConfig) -> Result<HybridChannel> {
    if scene.paths.is_empty() {
        return Err(Error::invalid("scene must contain at least one path"));
    }
    let n = config.n_antennas;
    let spacing = config.spacing_m();
    let scale = Complex64::from((n as f64 / scene.n_paths() as f64).sqrt());
    let mut coeffs = CMatrix::zeros(n, config.n_subcarriers);
    for m in 0..config.n_subcarriers {
        let freq = config.subcarrier_freq_hz(m);
        let lambda = SPEED_OF_LIGHT / freq;
        let mut column = coeffs.column_mut(m);
        for path in &scene.paths {
            let gain = scene.gain_at(path, freq)?;
            let steering = match path.kind {
                PathKind::FarLos => far_steering(path.angle_rad, n, spacing / lambda)?,
                PathKind::NearNlos => {
                    near_steering(path.angle_rad, path.distance_m, n, spacing, lambda)?
                }
            };
            column.axpy(gain * scale, &steering, Complex64::from(1.0));
        }
    }
    if coeffs.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::invalid("channel contains non-finite entries"));
    }
    Ok(HybridChannel {
        coeffs,
        scene: scene.clone(),
        config: config.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_3;

    fn far_path(angle: f64, gain: Complex64) -> PathComponent {
        PathComponent {
            kind: PathKind::FarLos,
            gain,
            angle_rad: angle,
            distance_m: 120.0,
            delay_s: 120.0 / SPEED_OF_LIGHT,
            scatter_leg1_m: 0.0,
            scatter_leg2_m: 0.0,
        }
    }

    fn near_path(angle: f64, r: f64, gain: Complex64) -> PathComponent {
        PathComponent {
            kind: PathKind::NearNlos,
            gain,
            angle_rad: angle,
            distance_m: r,
            delay_s: (118.0 + r) / SPEED_OF_LIGHT,
            scatter_leg1_m: 118.0,
            scatter_leg2_m: r,
        }
    }

    fn scene(paths: Vec<PathComponent>) -> SceneRealization {
        SceneRealization::new(paths, 100e9, MaterialParams::default(), AbsorptionTable::default())
            .unwrap()
    }

    fn narrowband(n: usize) -> SystemConfig {
        SystemConfig {
            n_antennas: n,
            n_subcarriers: 1,
            n_rf_chains: 1,
            n_pilot_slots: 1,
            ..SystemConfig::desk()
        }
    }

    #[test]
    fn single_far_path_collapses_sum() {
        let cfg = narrowband(16);
        let s = scene(vec![far_path(1.2, Complex64::new(1.0, 0.0))]);
        let h = assemble_channel(&s, &cfg).unwrap();
        let a = far_steering(1.2, 16, 0.5).unwrap();
        let diff = (h.coeffs.column(0) - a * Complex64::from(4.0)).norm();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn two_paths_match_scalar_oracle() {
        let cfg = narrowband(8);
        let (ga, gb) = (Complex64::new(0.3, -0.2), Complex64::new(-0.1, 0.4));
        let (tf, tn, r) = (FRAC_PI_3, 2.0, 0.4);
        let s = scene(vec![far_path(tf, ga), near_path(tn, r, gb)]);
        let h = assemble_channel(&s, &cfg).unwrap();

        let lambda = SPEED_OF_LIGHT / cfg.carrier_freq_hz;
        let d = lambda / 2.0;
        let n = 8.0f64;
        let dist = |k: usize| {
            let x = (k as f64 - (n - 1.0) / 2.0) * d;
            ((-r * tn.cos() - x).powi(2) + (r * tn.sin()).powi(2)).sqrt()
        };
        for k in 0..8 {
            let a = Complex64::from_polar(1.0 / n.sqrt(), -std::f64::consts::PI * tf.cos() * k as f64);
            let b = Complex64::from_polar(
                1.0 / n.sqrt(),
                -std::f64::consts::TAU / lambda * (dist(k) - dist(0)),
            );
            let expected = (n / 2.0).sqrt() * (ga * a + gb * b);
            assert!((h.coeffs[(k, 0)] - expected).norm() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn linear_in_gains() {
        let cfg = SystemConfig::desk();
        let s = scene(vec![
            far_path(0.9, Complex64::new(1e-6, 2e-6)),
            near_path(2.0, 0.8, Complex64::new(-3e-6, 1e-6)),
        ]);
        let h = assemble_channel(&s, &cfg).unwrap();
        let h2 = assemble_channel(&s.scaled(Complex64::from(2.0)), &cfg).unwrap();
        assert!((&h2.coeffs - &h.coeffs * Complex64::from(2.0)).norm() < 1e-15 * h.coeffs.norm() * 10.0);
    }

    #[test]
    fn superposition_of_single_path_scenes() {
        let cfg = SystemConfig::desk();
        let p1 = far_path(0.9, Complex64::new(1.0, 2.0));
        let p2 = near_path(2.0, 0.8, Complex64::new(-3.0, 1.0));
        let both = assemble_channel(&scene(vec![p1.clone(), p2.clone()]), &cfg).unwrap();
        let one = assemble_channel(&scene(vec![p1]), &cfg).unwrap();
        let two = assemble_channel(&scene(vec![p2]), &cfg).unwrap();
        // Each single-path scene carries sqrt(N/1); the joint one sqrt(N/2).
        let sum = (&one.coeffs + &two.coeffs) * Complex64::from(0.5f64.sqrt());
        assert!((&both.coeffs - sum).norm() < 1e-12 * both.coeffs.norm());
    }

    #[test]
    fn wideband_gain_follows_delay_phase() {
        let cfg = SystemConfig::desk();
        let s = scene(vec![far_path(1.0, Complex64::from(1.0))]);
        let p = &s.paths[0];
        let f = cfg.subcarrier_freq_hz(0);
        let g = s.gain_at(p, f).unwrap();
        let expected = Complex64::from_polar(
            100e9 / f,
            -std::f64::consts::TAU * (f - 100e9) * p.delay_s,
        );
        assert!((g - expected).norm() < 1e-9);
    }

    #[test]
    fn rejects_empty_scene() {
        assert!(SceneRealization::new(vec![], 1e11, MaterialParams::default(), AbsorptionTable::default()).is_err());
    }
}
