use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{DictionaryKind, SystemConfig};
use crate::error::{Error, Result};

/// Experiment grid: every `(n_rf, n_pilots)` pair is one cell, evaluated at
/// every SNR for `n_trials` scenes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub snr_grid_db: Vec<f64>,
    pub n_rf_grid: Vec<usize>,
    pub pilot_grid: Vec<usize>,
    pub n_trials: usize,
    pub dictionary: DictionaryKind,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            snr_grid_db: (-5..=5).map(|i| 2.0 * i as f64).collect(),
            n_rf_grid: vec![8, 12, 16],
            pilot_grid: vec![8, 16, 32],
            n_trials: 200,
            dictionary: DictionaryKind::Polar,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub n_rf: usize,
    pub n_pilots: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.snr_grid_db.is_empty() || self.n_rf_grid.is_empty() || self.pilot_grid.is_empty() {
            return Err(Error::Config("sweep grids must be nonempty".into()));
        }
        if self.n_trials == 0 {
            return Err(Error::Config("n_trials must be >= 1".into()));
        }
        // JSON has no infinities, so noiseless points cannot go in a manifest.
        if let Some(s) = self.snr_grid_db.iter().find(|s| !s.is_finite()) {
            return Err(Error::Config(format!("SNR grid entry {s} is not finite")));
        }
        if self.n_rf_grid.contains(&0) || self.pilot_grid.contains(&0) {
            return Err(Error::Config("n_rf and pilot grid entries must be >= 1".into()));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Loads a `.toml` or `.json` sweep file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_json = path
            .extension()
            .is_some_and(|ext| ext.eq_ignore_ascii_case("json"));
        let spec: Self = if is_json {
            serde_json::from_str(&text).map_err(|e| {
                Error::Config(format!(
                    "{}: line {}, column {}: {e}",
                    path.display(),
                    e.line(),
                    e.column()
                ))
            })?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        spec.validate()
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(spec)
    }

    /// Cells in `n_rf`-major order, split into those valid for `system` and
    /// those dropped because `n_rf > N` or `n_pilots * n_rf > N`.
    pub fn cells(&self, system: &SystemConfig) -> (Vec<Cell>, Vec<Cell>) {
        let mut valid = Vec::new();
        let mut skipped = Vec::new();
        for &n_rf in &self.n_rf_grid {
            for &n_pilots in &self.pilot_grid {
                let cell = Cell { n_rf, n_pilots };
                if n_rf <= system.n_antennas && n_rf * n_pilots <= system.n_antennas {
                    valid.push(cell);
                } else {
                    skipped.push(cell);
                }
            }
        }
        (valid, skipped)
    }
}
