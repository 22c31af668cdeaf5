//! System, scene and experiment configuration.
//!
//! An experiment is described by one TOML (or JSON) document with the
//! sections `[system]`, `[scene]`, `[dictionary]`, `[measurement]` and
//! `[estimator]`. Every section except `[system]` may be omitted.

use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Array and OFDM numerology shared by every stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub n_antennas: usize,
    pub n_rf_chains: usize,
    pub n_pilot_slots: usize,
    pub n_subcarriers: usize,
    pub carrier_freq_hz: f64,
    pub bandwidth_hz: f64,
    /// Physical element spacing; half the carrier wavelength when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element_spacing_m: Option<f64>,
    #[serde(default)]
    pub rng_seed: u64,
}

impl SystemConfig {
    /// Desk-scale profile: 64 antennas, 16 subcarriers at 100 GHz / 60 MHz.
    pub fn desk() -> Self {
        Self {
            n_antennas: 64,
            n_rf_chains: 8,
            n_pilot_slots: 4,
            n_subcarriers: 16,
            carrier_freq_hz: 100e9,
            bandwidth_hz: 60e6,
            element_spacing_m: None,
            rng_seed: 0,
        }
    }

    /// Full-scale profile with a 256-element array.
    pub fn large_array() -> Self {
        Self {
            n_antennas: 256,
            n_rf_chains: 8,
            n_pilot_slots: 16,
            ..Self::desk()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_antennas == 0 {
            return bad("n_antennas must be positive".into());
        }
        if self.n_rf_chains == 0 || self.n_rf_chains > self.n_antennas {
            return bad(format!(
                "n_rf_chains must be in 1..={} (got {})",
                self.n_antennas, self.n_rf_chains
            ));
        }
        if self.n_pilot_slots == 0 {
            return bad("n_pilot_slots must be positive".into());
        }
        if self.n_measurements() > self.n_antennas {
            return bad(format!(
                "n_pilot_slots * n_rf_chains = {} exceeds n_antennas = {}",
                self.n_measurements(),
                self.n_antennas
            ));
        }
        if self.n_subcarriers == 0 {
            return bad("n_subcarriers must be positive".into());
        }
        if !(self.carrier_freq_hz.is_finite() && self.carrier_freq_hz > 0.0) {
            return bad(format!("carrier_freq_hz must be > 0 (got {})", self.carrier_freq_hz));
        }
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return bad(format!("bandwidth_hz must be > 0 (got {})", self.bandwidth_hz));
        }
        if let Some(d) = self.element_spacing_m {
            if !(d.is_finite() && d > 0.0) {
                return bad(format!("element_spacing_m must be > 0 (got {d})"));
            }
        }
        Ok(())
    }

    /// Rows of the stacked combining matrix, `P * N_RF`.
    pub fn n_measurements(&self) -> usize {
        self.n_pilot_slots * self.n_rf_chains
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq_hz
    }

    pub fn spacing_m(&self) -> f64 {
        self.element_spacing_m
            .unwrap_or_else(|| self.wavelength_m() / 2.0)
    }

    /// Array aperture `N * d`.
    pub fn aperture_m(&self) -> f64 {
        self.n_antennas as f64 * self.spacing_m()
    }

    /// Near-field / far-field boundary `2 D^2 / lambda`.
    pub fn rayleigh_distance_m(&self) -> f64 {
        let d = self.aperture_m();
        2.0 * d * d / self.wavelength_m()
    }

    /// Frequency of subcarrier `m`, on a uniform grid centred on the carrier.
    pub fn subcarrier_freq_hz(&self, m: usize) -> f64 {
        let mm = self.n_subcarriers as f64;
        self.carrier_freq_hz + (m as f64 - (mm - 1.0) / 2.0) * self.bandwidth_hz / mm
    }
}

/// Reflector properties entering the NLOS reflection coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams {
    pub refractive_index: f64,
    pub roughness_std_m: f64,
    pub incidence_angle_rad: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self {
            refractive_index: 2.24,
            roughness_std_m: 1e-4,
            incidence_angle_rad: FRAC_PI_4,
        }
    }
}

impl MaterialParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.refractive_index.is_finite() && self.refractive_index > 1.0) {
            return Err(Error::invalid(format!(
                "refractive index must be > 1 (got {})",
                self.refractive_index
            )));
        }
        if !(self.roughness_std_m >= 0.0) {
            return Err(Error::invalid(format!(
                "roughness std must be >= 0 (got {})",
                self.roughness_std_m
            )));
        }
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&self.incidence_angle_rad) {
            return Err(Error::invalid(format!(
                "incidence angle must be in [0, pi/2) (got {})",
                self.incidence_angle_rad
            )));
        }
        Ok(())
    }
}

/// Tabulated molecular absorption coefficient k(f) in 1/m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionTable {
    entries: Vec<(f64, f64)>,
}

impl Default for AbsorptionTable {
    fn default() -> Self {
        Self::constant(0.0)
    }
}

impl AbsorptionTable {
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("absorption table is empty"));
        }
        for (i, &(f, k)) in entries.iter().enumerate() {
            if !f.is_finite() || !(k.is_finite() && k >= 0.0) {
                return Err(Error::invalid(format!(
                    "absorption entry {i}: ({f}, {k}) must be finite with k >= 0"
                )));
            }
            if i > 0 && f <= entries[i - 1].0 {
                return Err(Error::invalid(format!(
                    "absorption frequencies must be strictly increasing (entry {i})"
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn constant(k_per_m: f64) -> Self {
        Self {
            entries: vec![(0.0, k_per_m)],
        }
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    /// Linear interpolation, clamped to the end points.
    pub fn lookup(&self, freq_hz: f64) -> f64 {
        let e = &self.entries;
        let first = e[0];
        let last = e[e.len() - 1];
        if freq_hz <= first.0 {
            return first.1;
        }
        if freq_hz >= last.0 {
            return last.1;
        }
        let hi = e.partition_point(|&(f, _)| f <= freq_hz);
        let (f0, k0) = e[hi - 1];
        let (f1, k1) = e[hi];
        k0 + (k1 - k0) * (freq_hz - f0) / (f1 - f0)
    }

    /// Reads a two-column `frequency_hz,k_per_m` CSV. A non-numeric first
    /// row is treated as a header.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(file);
        let mut entries = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| {
                Error::Config(format!("{}: row {}: {e}", path.display(), row + 1))
            })?;
            if record.len() != 2 {
                return Err(Error::Config(format!(
                    "{}: row {}: expected 2 columns, found {}",
                    path.display(),
                    row + 1,
                    record.len()
                )));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(f), Ok(k)) => entries.push((f, k)),
                _ if row == 0 => continue,
                _ => {
                    return Err(Error::Config(format!(
                        "{}: row {}: non-numeric value",
                        path.display(),
                        row + 1
                    )))
                }
            }
        }
        Self::new(entries).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Stochastic scene generation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneParams {
    pub l_far: usize,
    pub l_near: usize,
    /// Uniform range of LOS distances (m).
    pub los_range_m: [f64; 2],
    /// Near-field scatterers fall in `[f * D_R / 10, f * D_R]`.
    pub near_range_fraction: f64,
    pub material: MaterialParams,
    #[serde(skip)]
    pub absorption: AbsorptionTable,
    /// Two-column CSV with k(f); resolved relative to the config file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub absorption_csv: Option<PathBuf>,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            l_far: 1,
            l_near: 3,
            los_range_m: [110.0, 160.0],
            near_range_fraction: 0.5,
            material: MaterialParams::default(),
            absorption: AbsorptionTable::default(),
            absorption_csv: None,
        }
    }
}

impl SceneParams {
    pub fn validate(&self) -> Result<()> {
        if self.l_far == 0 && self.l_near == 0 {
            return Err(Error::invalid("scene needs at least one path"));
        }
        let [lo, hi] = self.los_range_m;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::invalid(format!(
                "LOS range [{lo}, {hi}] must satisfy 0 < lo <= hi"
            )));
        }
        if !(self.near_range_fraction > 0.0 && self.near_range_fraction < 1.0) {
            return Err(Error::invalid(format!(
                "near_range_fraction must be in (0, 1) (got {})",
                self.near_range_fraction
            )));
        }
        self.material.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DictionaryKind {
    #[default]
    Polar,
    Angular,
}

impl std::fmt::Display for DictionaryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DictionaryKind::Polar => "polar",
            DictionaryKind::Angular => "angular",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DictionaryParams {
    /// Angle grid size; `N` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_angles: Option<usize>,
    pub beta: f64,
    pub min_distance_m: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_columns: Option<usize>,
}

impl Default for DictionaryParams {
    fn default() -> Self {
        Self {
            n_angles: None,
            beta: 1.2,
            min_distance_m: 3.0,
            max_columns: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CombinerMode {
    #[default]
    UniformReal,
    UnitModulusPhase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct MeasurementParams {
    pub combiner: CombinerMode,
}

/// How OMP scores candidate atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AtomSelection {
    /// `||a_k^H R||^2 / ||a_k||^2`: the best single-atom least-squares fit.
    #[default]
    Normalized,
    /// `||a_k^H R||^2` on unnormalized sensing columns.
    Raw,
}

/// How OMP computes support coefficients each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientUpdate {
    #[default]
    LeastSquares,
    /// `A(:, s)^H Y`, kept for ablation.
    MatchedFilter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorParams {
    /// Fixed iteration count; the scene's true path count when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sparsity: Option<usize>,
    pub selection: AtomSelection,
    pub update: CoefficientUpdate,
}

/// Everything read from one experiment config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    #[serde(default)]
    pub scene: SceneParams,
    #[serde(default)]
    pub dictionary: DictionaryParams,
    #[serde(default)]
    pub measurement: MeasurementParams,
    #[serde(default)]
    pub estimator: EstimatorParams,
}

impl ExperimentConfig {
    pub fn desk() -> Self {
        Self {
            system: SystemConfig::desk(),
            scene: SceneParams::default(),
            dictionary: DictionaryParams {
                min_distance_m: 0.25,
                ..DictionaryParams::default()
            },
            measurement: MeasurementParams::default(),
            estimator: EstimatorParams::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Loads a `.toml` or `.json` config and resolves the absorption CSV.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_json = path
            .extension()
            .is_some_and(|ext| ext.eq_ignore_ascii_case("json"));
        let mut cfg: Self = if is_json {
            serde_json::from_str(&text).map_err(|e| {
                Error::Config(format!(
                    "{}: line {}, column {}: {e}",
                    path.display(),
                    e.line(),
                    e.column()
                ))
            })?
        } else {
            toml::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        if let Some(csv_path) = cfg.scene.absorption_csv.clone() {
            let resolved = if csv_path.is_relative() {
                path.parent().unwrap_or(Path::new(".")).join(&csv_path)
            } else {
                csv_path
            };
            cfg.scene.absorption = AbsorptionTable::from_csv(&resolved)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.scene
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        let d = &self.dictionary;
        if !(d.beta > 0.0) || !(d.min_distance_m > 0.0) || d.n_angles == Some(0) {
            return Err(Error::Config(
                "dictionary needs beta > 0, min_distance_m > 0 and n_angles >= 1".into(),
            ));
        }
        if self.estimator.sparsity == Some(0) {
            return Err(Error::Config("estimator sparsity must be >= 1".into()));
        }
        Ok(())
    }
}
