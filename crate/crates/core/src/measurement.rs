//! Pilot-phase observations through the analog combiner.
//!
//! Pilot symbols are fixed to 1, so slot `p` of subcarrier `m` observes
//! `W_p h_m + W_p n_{m,p}` with `n_{m,p} ~ CN(0, sigma^2 I_N)`. The per-antenna
//! noise variance follows from the pre-combining SNR,
//! `sigma^2 = mean_m(||h_m||^2) / N * 10^(-snr_db / 10)`.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::{CMatrix, HybridChannel};
use crate::config::{CombinerMode, SystemConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CombiningMatrix {
    /// `(P * N_RF) x N`, slot blocks stacked top to bottom.
    pub matrix: CMatrix,
    pub n_rf_chains: usize,
    pub n_pilot_slots: usize,
    pub mode: CombinerMode,
}

impl CombiningMatrix {
    pub fn n_rows(&self) -> usize {
        self.matrix.nrows()
    }

    /// `N_RF x N` combiner of pilot slot `p`.
    pub fn slot(&self, p: usize) -> nalgebra::DMatrixView<'_, Complex64> {
        self.matrix.rows(p * self.n_rf_chains, self.n_rf_chains)
    }
}

pub fn generate_combiner<R: Rng + ?Sized>(
    config: &SystemConfig,
    mode: CombinerMode,
    rng: &mut R,
) -> CombiningMatrix {
    let n = config.n_antennas;
    let rows = config.n_measurements();
    let scale = 1.0 / (n as f64).sqrt();
    let mut matrix = CMatrix::zeros(rows, n);
    // Row-major fill so a given seed maps to the same entries regardless of
    // the matrix storage order.
    for i in 0..rows {
        for j in 0..n {
            matrix[(i, j)] = match mode {
                CombinerMode::UniformReal => Complex64::new(rng.random_range(-1.0..=1.0) * scale, 0.0),
                CombinerMode::UnitModulusPhase => {
                    Complex64::from_polar(scale, rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
                }
            };
        }
    }
    CombiningMatrix {
        matrix,
        n_rf_chains: config.n_rf_chains,
        n_pilot_slots: config.n_pilot_slots,
        mode,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    /// `(P * N_RF) x M`, column `m` is `y_m`.
    pub observations: CMatrix,
    pub noise_variance: f64,
    pub snr_db: f64,
    pub pilot_value: Complex64,
}

/// Per-antenna noise variance for a target SNR; zero when `snr_db = +inf`.
pub fn noise_variance_for(h: &CMatrix, snr_db: f64) -> Result<f64> {
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::invalid(format!("SNR must be finite or +inf (got {snr_db})")));
    }
    if snr_db == f64::INFINITY {
        return Ok(0.0);
    }
    let mean_power = h.column_iter().map(|c| c.norm_squared()).sum::<f64>() / h.ncols() as f64;
    Ok(mean_power / h.nrows() as f64 * 10f64.powf(-snr_db / 10.0))
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, std_per_dim: f64) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * std_per_dim, im * std_per_dim)
}

/// `y_m = W h_m + [W_1 n_{m,1}; ...; W_P n_{m,P}]` with an explicit
/// per-antenna noise variance. The noise draws depend only on `rng`, the
/// shapes and `noise_variance`, never on `h`.
pub fn observe_with_variance<R: Rng + ?Sized>(
    h: &CMatrix,
    w: &CombiningMatrix,
    noise_variance: f64,
    rng: &mut R,
) -> Result<CMatrix> {
    let n = w.matrix.ncols();
    if h.nrows() != n {
        return Err(Error::shape(
            format!("channel with {n} antenna rows"),
            format!("{} x {}", h.nrows(), h.ncols()),
        ));
    }
    if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
        return Err(Error::invalid(format!("noise variance must be >= 0 (got {noise_variance})")));
    }
    let mut y = &w.matrix * h;
    if noise_variance > 0.0 {
        let std = (noise_variance / 2.0).sqrt();
        for m in 0..h.ncols() {
            for p in 0..w.n_pilot_slots {
                let noise = DVector::from_fn(n, |_, _| complex_gaussian(rng, std));
                let combined = w.slot(p) * noise;
                let mut target = y.view_mut((p * w.n_rf_chains, m), (w.n_rf_chains, 1));
                target += combined;
            }
        }
    }
    Ok(y)
}

pub fn observe<R: Rng + ?Sized>(
    channel: &HybridChannel,
    w: &CombiningMatrix,
    snr_db: f64,
    rng: &mut R,
) -> Result<MeasurementSet> {
    let noise_variance = noise_variance_for(&channel.coeffs, snr_db)?;
    let observations = observe_with_variance(&channel.coeffs, w, noise_variance, rng)?;
    Ok(MeasurementSet {
        observations,
        noise_variance,
        snr_db,
        pilot_value: Complex64::new(1.0, 0.0),
    })
}
