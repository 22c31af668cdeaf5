//! Polar-domain (angle x distance) and angular-domain sparsifying dictionaries.
//!
//! Angles are sampled uniformly in `cos(theta)` over `(-1, 1)`. At each angle
//! the polar dictionary holds one far-field column (the "infinite distance"
//! ring) followed by near-field rings at
//!
//! ```text
//! r_s = N^2 d^2 sin^2(theta) / (2 beta^2 lambda s),   s = 1, 2, ...
//! ```
//!
//! i.e. uniform steps in `1 / r`, down to a minimum distance. `sin(theta)` is
//! the cosine of the incidence angle measured from broadside.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{far_steering, near_steering, CMatrix};
use crate::config::{DictionaryKind, DictionaryParams, SystemConfig};
use crate::error::{Error, Result};

/// Distance sample of one dictionary column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ring {
    FarField,
    Finite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub angle_index: usize,
    pub ring: Ring,
}

/// Realized dictionary layout, recorded alongside benchmark outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictionaryMetadata {
    pub kind: DictionaryKind,
    pub n_antennas: usize,
    pub n_angles: usize,
    pub n_columns: usize,
    pub n_far_columns: usize,
    pub n_near_columns: usize,
    /// Near-field rings per angle (the far-field column not included).
    pub ring_counts: Vec<usize>,
    pub beta: Option<f64>,
    pub min_distance_m: Option<f64>,
    pub built_at_freq_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarDictionary {
    matrix: CMatrix,
    angle_grid: Vec<f64>,
    /// Per angle: the far-field sentinel followed by finite rings, far to near.
    rings: Vec<Vec<Ring>>,
    atoms: Vec<Atom>,
    kind: DictionaryKind,
    oversampling_beta: Option<f64>,
    min_distance_m: Option<f64>,
    built_at_freq_hz: f64,
}

/// `n` angles uniform in `cos(theta)`: `cos(theta_i) = (2i - n + 1) / n`.
pub fn cosine_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| ((2.0 * i as f64 - n as f64 + 1.0) / n as f64).acos())
        .collect()
}

/// Ring distances at `angle_rad`, far to near.
pub fn ring_distances(config: &SystemConfig, angle_rad: f64, beta: f64, min_distance_m: f64) -> Vec<f64> {
    let n = config.n_antennas as f64;
    let d = config.spacing_m();
    let sin = angle_rad.sin();
    let base = n * n * d * d * sin * sin / (2.0 * beta * beta * config.wavelength_m());
    (1..)
        .map(|s| base / s as f64)
        .take_while(|&r| r >= min_distance_m)
        .collect()
}

impl PolarDictionary {
    fn from_layout(
        config: &SystemConfig,
        angle_grid: Vec<f64>,
        rings: Vec<Vec<Ring>>,
        kind: DictionaryKind,
        beta: Option<f64>,
        min_distance_m: Option<f64>,
    ) -> Result<Self> {
        let n = config.n_antennas;
        let lambda = config.wavelength_m();
        let spacing = config.spacing_m();
        let atoms: Vec<Atom> = rings
            .iter()
            .enumerate()
            .flat_map(|(angle_index, rs)| rs.iter().map(move |&ring| Atom { angle_index, ring }))
            .collect();
        let mut matrix = CMatrix::zeros(n, atoms.len());
        for (col, atom) in atoms.iter().enumerate() {
            let theta = angle_grid[atom.angle_index];
            let v = match atom.ring {
                Ring::FarField => far_steering(theta, n, spacing / lambda)?,
                Ring::Finite(r) => near_steering(theta, r, n, spacing, lambda)?,
            };
            matrix.set_column(col, &v);
        }
        Ok(Self {
            matrix,
            angle_grid,
            rings,
            atoms,
            kind,
            oversampling_beta: beta,
            min_distance_m,
            built_at_freq_hz: config.carrier_freq_hz,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_columns(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn column(&self, k: usize) -> DVector<Complex64> {
        self.matrix.column(k).into_owned()
    }

    pub fn angle_grid(&self) -> &[f64] {
        &self.angle_grid
    }

    pub fn rings(&self) -> &[Vec<Ring>] {
        &self.rings
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn kind(&self) -> DictionaryKind {
        self.kind
    }

    pub fn metadata(&self) -> DictionaryMetadata {
        let ring_counts: Vec<usize> = self
            .rings
            .iter()
            .map(|rs| rs.iter().filter(|r| matches!(r, Ring::Finite(_))).count())
            .collect();
        let n_near: usize = ring_counts.iter().sum();
        DictionaryMetadata {
            kind: self.kind,
            n_antennas: self.n_rows(),
            n_angles: self.angle_grid.len(),
            n_columns: self.n_columns(),
            n_far_columns: self.n_columns() - n_near,
            n_near_columns: n_near,
            ring_counts,
            beta: self.oversampling_beta,
            min_distance_m: self.min_distance_m,
            built_at_freq_hz: self.built_at_freq_hz,
        }
    }

    /// Largest off-diagonal `|u_i^H u_j|`.
    pub fn mutual_coherence(&self) -> f64 {
        let gram = self.matrix.ad_mul(&self.matrix);
        let s = gram.nrows();
        let mut worst = 0.0f64;
        for j in 0..s {
            for i in 0..j {
                worst = worst.max(gram[(i, j)].norm());
            }
        }
        worst
    }

    /// `U * coeffs`: synthesis from polar-domain coefficients.
    pub fn synthesize(&self, coeffs: &CMatrix) -> Result<CMatrix> {
        if coeffs.nrows() != self.n_columns() {
            return Err(Error::shape(
                format!("{} coefficient rows", self.n_columns()),
                format!("{} x {}", coeffs.nrows(), coeffs.ncols()),
            ));
        }
        Ok(&self.matrix * coeffs)
    }

    /// Minimum-norm polar representation `U^+ H` of an antenna-domain
    /// channel. Exact when `U` has full row rank.
    pub fn min_norm_coefficients(&self, h: &CMatrix) -> Result<CMatrix> {
        if h.nrows() != self.n_rows() {
            return Err(Error::shape(
                format!("{} antenna rows", self.n_rows()),
                format!("{} x {}", h.nrows(), h.ncols()),
            ));
        }
        Ok(self.pseudo_inverse() * h)
    }

    pub fn pseudo_inverse(&self) -> CMatrix {
        let svd = self.matrix.clone().svd(true, true);
        let eps = f64::EPSILON * self.n_columns().max(self.n_rows()) as f64
            * svd.singular_values.max();
        svd.pseudo_inverse(eps)
            .expect("SVD computed with both singular vector sets")
    }

    /// Wraps an explicit column set, e.g. a dictionary read back from disk.
    pub fn from_matrix(matrix: CMatrix, kind: DictionaryKind, built_at_freq_hz: f64) -> Self {
        let s = matrix.ncols();
        Self {
            angle_grid: Vec::new(),
            rings: Vec::new(),
            atoms: (0..s)
                .map(|angle_index| Atom {
                    angle_index,
                    ring: Ring::FarField,
                })
                .collect(),
            matrix,
            kind,
            oversampling_beta: None,
            min_distance_m: None,
            built_at_freq_hz,
        }
    }
}

/// Polar dictionary with `n_angles` angles and inverse-distance rings.
pub fn build_polar_dictionary(
    config: &SystemConfig,
    n_angles: usize,
    beta: f64,
    min_distance_m: f64,
) -> Result<PolarDictionary> {
    build_polar_dictionary_capped(config, n_angles, beta, min_distance_m, None)
}

/// As [`build_polar_dictionary`], trimming the nearest rings (from the most
/// populated angle first, lowest angle index on ties) until at most
/// `max_columns` columns remain.
pub fn build_polar_dictionary_capped(
    config: &SystemConfig,
    n_angles: usize,
    beta: f64,
    min_distance_m: f64,
    max_columns: Option<usize>,
) -> Result<PolarDictionary> {
    if n_angles == 0 {
        return Err(Error::invalid("n_angles must be >= 1"));
    }
    if !(min_distance_m > 0.0) || !(beta > 0.0) {
        return Err(Error::invalid("beta and min_distance_m must be > 0"));
    }
    let angle_grid = cosine_grid(n_angles);
    let mut near: Vec<Vec<f64>> = angle_grid
        .iter()
        .map(|&theta| ring_distances(config, theta, beta, min_distance_m))
        .collect();
    if let Some(cap) = max_columns {
        if cap < n_angles {
            return Err(Error::invalid(format!(
                "max_columns {cap} is below the {n_angles} far-field columns"
            )));
        }
        let mut total = n_angles + near.iter().map(Vec::len).sum::<usize>();
        while total > cap {
            let (idx, _) = near
                .iter()
                .enumerate()
                .rev()
                .max_by_key(|(_, rs)| rs.len())
                .expect("at least one angle");
            near[idx].pop();
            total -= 1;
        }
    }
    let rings = near
        .into_iter()
        .map(|rs| {
            std::iter::once(Ring::FarField)
                .chain(rs.into_iter().map(Ring::Finite))
                .collect()
        })
        .collect();
    PolarDictionary::from_layout(
        config,
        angle_grid,
        rings,
        DictionaryKind::Polar,
        Some(beta),
        Some(min_distance_m),
    )
}

/// `N` far-field columns on the uniform-in-cosine grid (the angular-domain
/// baseline).
pub fn build_angular_dictionary(config: &SystemConfig) -> Result<PolarDictionary> {
    let n = config.n_antennas;
    let angle_grid = cosine_grid(n);
    let rings = vec![vec![Ring::FarField]; n];
    PolarDictionary::from_layout(config, angle_grid, rings, DictionaryKind::Angular, None, None)
}

/// Builds the dictionary selected by `kind` from config parameters.
pub fn build_dictionary(
    config: &SystemConfig,
    params: &DictionaryParams,
    kind: DictionaryKind,
) -> Result<PolarDictionary> {
    match kind {
        DictionaryKind::Angular => build_angular_dictionary(config),
        DictionaryKind::Polar => build_polar_dictionary_capped(
            config,
            params.n_angles.unwrap_or(config.n_antennas),
            params.beta,
            params.min_distance_m,
            params.max_columns,
        ),
    }
}

/// `U * coeffs`.
pub fn transform(dict: &PolarDictionary, coeffs: &CMatrix) -> Result<CMatrix> {
    dict.synthesize(coeffs)
}
