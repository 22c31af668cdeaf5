use std::io::Write;
use std::path::{Path, PathBuf};

use log::warn;

use super::stats::{summarize, NmseRecord, SummaryRow};
use super::synth::{METHOD_DENOISED, METHOD_OMP};
use crate::dictionary::PolarDictionary;
use crate::error::{Error, Result};
use crate::omp::nmse_db;
use crate::tensor_io::{read_matrix, read_tensor, DatasetManifest, SampleRecord, Split};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitFilter {
    #[default]
    All,
    Train,
    Validation,
}

impl SplitFilter {
    fn admits(self, split: Split) -> bool {
        match self {
            SplitFilter::All => true,
            SplitFilter::Train => split == Split::Train,
            SplitFilter::Validation => split == Split::Validation,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleError {
    pub id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<SummaryRow>,
    /// Samples whose denoised tensor was missing or unusable; they are left
    /// out of the denoised rows only.
    pub errors: Vec<SampleError>,
}

/// Denoised estimate expected for sample `id`.
pub fn denoised_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.hfct"))
}

/// Scores every admitted sample in the antenna domain: `U * H^P` against the
/// stored channel. With `denoised_dir`, also scores `<dir>/<id>.hfct` under
/// the `omp+denoiser` method.
pub fn evaluate(manifest_path: &Path, denoised_dir: Option<&Path>, split: SplitFilter) -> Result<EvalReport> {
    let manifest = DatasetManifest::load(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let meta = &manifest.dictionary.metadata;
    let dict_matrix = read_matrix(&base.join(&manifest.dictionary.path))?;
    if dict_matrix.shape() != (meta.n_antennas, meta.n_columns) {
        return Err(Error::Validation(format!(
            "dictionary tensor is {:?}, metadata says {} x {}",
            dict_matrix.shape(),
            meta.n_antennas,
            meta.n_columns
        )));
    }
    let dict = PolarDictionary::from_matrix(dict_matrix, meta.kind, meta.built_at_freq_hz);

    let mut records = Vec::new();
    let mut errors = Vec::new();
    let selected: Vec<&SampleRecord> = manifest.samples.iter().filter(|r| split.admits(r.split)).collect();
    if selected.is_empty() {
        return Err(Error::Validation(format!("no samples in split {split:?}")));
    }
    for r in selected {
        let h = read_matrix(&base.join(&r.channel_path))?;
        let noisy = read_matrix(&base.join(&r.noisy_path))?;
        let record = |method: &str, nmse_db: f64| NmseRecord {
            snr_db: r.snr_db,
            n_rf: r.n_rf,
            n_pilots: r.n_pilot_slots,
            dictionary: meta.kind,
            method: method.into(),
            nmse_db,
        };
        records.push(record(METHOD_OMP, nmse_db(&h, &dict.synthesize(&noisy)?)?));

        if let Some(dir) = denoised_dir {
            let path = denoised_path(dir, &r.id);
            let scored = read_tensor(&path)
                .and_then(|t| t.to_matrix())
                .and_then(|m| {
                    if m.shape() != noisy.shape() {
                        return Err(Error::shape(format!("{:?}", noisy.shape()), format!("{:?}", m.shape())));
                    }
                    nmse_db(&h, &dict.synthesize(&m)?)
                });
            match scored {
                Ok(v) => records.push(record(METHOD_DENOISED, v)),
                Err(e) => {
                    warn!("{}: {e}", r.id);
                    errors.push(SampleError {
                        id: r.id.clone(),
                        message: e.to_string(),
                    });
                }
            }
        }
    }
    Ok(EvalReport {
        rows: summarize(&records),
        errors,
    })
}

pub const CSV_HEADER: [&str; 7] = [
    "snr_db",
    "n_rf",
    "n_pilots",
    "dictionary",
    "method",
    "nmse_db_mean",
    "nmse_db_stderr",
];

pub fn write_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Validation(format!("csv output: {e}"));
    w.write_record(CSV_HEADER).map_err(err)?;
    for r in rows {
        w.write_record([
            r.snr_db.to_string(),
            r.n_rf.to_string(),
            r.n_pilots.to_string(),
            r.dictionary.to_string(),
            r.method.clone(),
            r.nmse_db_mean.to_string(),
            r.nmse_db_stderr.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::Validation(format!("csv output: {e}")))?;
    Ok(())
}
