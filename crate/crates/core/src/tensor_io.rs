//! HFCT binary tensors and dataset manifests.
//!
//! HFCT layout (all integers little-endian):
//!
//! | offset | size       | field                                   |
//! |--------|------------|-----------------------------------------|
//! | 0      | 4          | magic `b"HFCT"`                         |
//! | 4      | 2          | version, `u16` = 1                      |
//! | 6      | 4          | dtype, `u32`; 1 = complex64 (2 x f32)   |
//! | 10     | 1          | ndim, `u8` >= 1                         |
//! | 11     | 4 * ndim   | dims, `u32` each >= 1                   |
//! | ...    | 8 * prod   | row-major (re, im) f32 pairs            |

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::{Complex32, Complex64};
use serde::{Deserialize, Serialize};

use crate::channel::CMatrix;
use crate::config::ExperimentConfig;
use crate::dictionary::DictionaryMetadata;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"HFCT";
pub const VERSION: u16 = 1;
pub const DTYPE_COMPLEX64: u32 = 1;

const HEADER_FIXED: usize = 11;

/// Dense row-major complex tensor with f32 parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTensor {
    dims: Vec<usize>,
    data: Vec<Complex32>,
}

impl ComplexTensor {
    pub fn new(dims: Vec<usize>, data: Vec<Complex32>) -> Result<Self> {
        if dims.is_empty() || dims.len() > u8::MAX as usize {
            return Err(Error::invalid(format!("tensor rank {} outside 1..=255", dims.len())));
        }
        if let Some(d) = dims.iter().find(|&&d| d == 0 || d > u32::MAX as usize) {
            return Err(Error::invalid(format!("tensor dimension {d} outside 1..=u32::MAX")));
        }
        let count = element_count(&dims)
            .ok_or_else(|| Error::invalid("tensor element count overflows"))?;
        if count != data.len() {
            return Err(Error::shape(format!("{count} elements"), format!("{}", data.len())));
        }
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[Complex32] {
        &self.data
    }

    /// Rank-2 tensor from a matrix, rounded to f32.
    pub fn from_matrix(m: &CMatrix) -> Self {
        let (rows, cols) = m.shape();
        let data = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| {
                let v = m[(i, j)];
                Complex32::new(v.re as f32, v.im as f32)
            })
            .collect();
        Self {
            dims: vec![rows, cols],
            data,
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let [rows, cols] = self.dims[..] else {
            return Err(Error::shape("rank-2 tensor", format!("rank {}", self.dims.len())));
        };
        Ok(CMatrix::from_fn(rows, cols, |i, j| {
            let v = self.data[i * cols + j];
            Complex64::new(v.re as f64, v.im as f64)
        }))
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_FIXED + 4 * self.dims.len() + 8 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&DTYPE_COMPLEX64.to_le_bytes());
        out.push(self.dims.len() as u8);
        for &d in &self.dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in &self.data {
            out.extend_from_slice(&v.re.to_bits().to_le_bytes());
            out.extend_from_slice(&v.im.to_bits().to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let need = |offset: usize, len: usize, what: &str| -> Result<()> {
            if bytes.len() < offset + len {
                Err(Error::format(
                    bytes.len() as u64,
                    format!("truncated: {what} needs bytes {offset}..{}", offset + len),
                ))
            } else {
                Ok(())
            }
        };
        need(0, 4, "magic")?;
        if &bytes[0..4] != MAGIC {
            return Err(Error::format(0, format!("bad magic {:?}", &bytes[0..4])));
        }
        need(4, 2, "version")?;
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(Error::format(4, format!("unsupported version {version}")));
        }
        need(6, 4, "dtype")?;
        let dtype = u32::from_le_bytes(bytes[6..10].try_into().expect("4 bytes"));
        if dtype != DTYPE_COMPLEX64 {
            return Err(Error::format(6, format!("unsupported dtype {dtype}")));
        }
        need(10, 1, "ndim")?;
        let ndim = bytes[10] as usize;
        if ndim == 0 {
            return Err(Error::format(10, "ndim must be >= 1"));
        }
        need(HEADER_FIXED, 4 * ndim, "dims")?;
        let mut dims = Vec::with_capacity(ndim);
        for i in 0..ndim {
            let at = HEADER_FIXED + 4 * i;
            let d = u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes")) as usize;
            if d == 0 {
                return Err(Error::format(at as u64, format!("dimension {i} is zero")));
            }
            dims.push(d);
        }
        let payload_at = HEADER_FIXED + 4 * ndim;
        let payload_len = element_count(&dims)
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| Error::format(HEADER_FIXED as u64, "dimension product overflows"))?;
        need(payload_at, payload_len, "payload")?;
        if bytes.len() != payload_at + payload_len {
            return Err(Error::format(
                (payload_at + payload_len) as u64,
                format!("{} trailing bytes", bytes.len() - payload_at - payload_len),
            ));
        }
        let data = bytes[payload_at..]
            .chunks_exact(8)
            .map(|c| {
                let re = f32::from_bits(u32::from_le_bytes(c[0..4].try_into().expect("4 bytes")));
                let im = f32::from_bits(u32::from_le_bytes(c[4..8].try_into().expect("4 bytes")));
                Complex32::new(re, im)
            })
            .collect();
        Ok(Self { dims, data })
    }
}

fn element_count(dims: &[usize]) -> Option<usize> {
    dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d))
}

pub fn write_tensor(path: &Path, tensor: &ComplexTensor) -> Result<()> {
    fs::write(path, tensor.encode()).map_err(|e| Error::io(path, e))
}

pub fn read_tensor(path: &Path) -> Result<ComplexTensor> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    ComplexTensor::decode(&bytes).map_err(|e| match e {
        Error::Format { offset, message } => {
            Error::format(offset, format!("{}: {message}", path.display()))
        }
        other => other,
    })
}

pub fn write_matrix(path: &Path, m: &CMatrix) -> Result<()> {
    write_tensor(path, &ComplexTensor::from_matrix(m))
}

pub fn read_matrix(path: &Path) -> Result<CMatrix> {
    read_tensor(path)?.to_matrix()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
}

/// One exported training pair plus the antenna-domain ground truth.
#[derive(Debug, Clone)]
pub struct DatasetSample {
    pub id: String,
    /// OMP polar-domain estimate, `S x M`.
    pub noisy: CMatrix,
    /// Polar-domain ground truth, `S x M`.
    pub clean: CMatrix,
    /// Antenna-domain channel, `N x M`.
    pub channel: CMatrix,
    pub snr_db: f64,
    pub n_rf: usize,
    pub n_pilot_slots: usize,
    pub seed: u64,
    pub trial: u64,
    pub sparsity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub noisy_path: String,
    pub clean_path: String,
    pub channel_path: String,
    pub snr_db: f64,
    pub n_rf: usize,
    pub n_pilot_slots: usize,
    pub seed: u64,
    pub trial: u64,
    pub sparsity: usize,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictionaryRecord {
    pub path: String,
    #[serde(flatten)]
    pub metadata: DictionaryMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format: String,
    pub version: u32,
    pub config: ExperimentConfig,
    pub dictionary: DictionaryRecord,
    pub train_fraction: f64,
    pub n_train: usize,
    pub n_validation: usize,
    /// Grid cells dropped because `P * N_RF > N`.
    #[serde(default)]
    pub skipped_cells: Vec<[usize; 2]>,
    pub samples: Vec<SampleRecord>,
}

pub const MANIFEST_FORMAT: &str = "hfce-dataset";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRAIN_FRACTION: f64 = 0.8;

/// Number of training groups out of `n_groups`: `round(0.8 * n_groups)`.
pub fn n_train_groups(n_groups: usize) -> usize {
    (n_groups as f64 * TRAIN_FRACTION).round() as usize
}

/// Splits trial groups 80/20 in order of first appearance: the first
/// `round(0.8 * G)` trials train, the rest validate. All samples of one trial
/// share a split.
pub fn assign_splits(samples: &[DatasetSample]) -> Vec<Split> {
    let mut groups: Vec<u64> = Vec::new();
    let mut seen = HashSet::new();
    for s in samples {
        if seen.insert(s.trial) {
            groups.push(s.trial);
        }
    }
    let train: HashSet<u64> = groups[..n_train_groups(groups.len())].iter().copied().collect();
    samples
        .iter()
        .map(|s| if train.contains(&s.trial) { Split::Train } else { Split::Validation })
        .collect()
}

fn check_id(id: &str) -> Result<()> {
    if id.is_empty() || id.contains(['/', '\\']) || id.starts_with('.') {
        return Err(Error::Validation(format!("sample id {id:?} is not a plain file stem")));
    }
    Ok(())
}

/// Writes the noisy/clean/channel triple of one sample under
/// `out_dir/samples/` and returns its manifest record.
pub fn write_sample(out_dir: &Path, sample: &DatasetSample, split: Split) -> Result<SampleRecord> {
    check_id(&sample.id)?;
    let channel_path = format!("samples/{}.channel.hfct", sample.id);
    write_sample_dir(out_dir)?;
    write_matrix(&out_dir.join(&channel_path), &sample.channel)?;
    write_sample_pair(out_dir, sample, channel_path, split)
}

/// As [`write_sample`], but references a channel tensor already written at
/// `channel_path` (relative to `out_dir`), so samples of one scene can share
/// it. `sample.channel` is not written.
pub fn write_sample_pair(
    out_dir: &Path,
    sample: &DatasetSample,
    channel_path: String,
    split: Split,
) -> Result<SampleRecord> {
    check_id(&sample.id)?;
    write_sample_dir(out_dir)?;
    let noisy_path = format!("samples/{}.noisy.hfct", sample.id);
    let clean_path = format!("samples/{}.clean.hfct", sample.id);
    write_matrix(&out_dir.join(&noisy_path), &sample.noisy)?;
    write_matrix(&out_dir.join(&clean_path), &sample.clean)?;
    Ok(SampleRecord {
        id: sample.id.clone(),
        noisy_path,
        clean_path,
        channel_path,
        snr_db: sample.snr_db,
        n_rf: sample.n_rf,
        n_pilot_slots: sample.n_pilot_slots,
        seed: sample.seed,
        trial: sample.trial,
        sparsity: sample.sparsity,
        split,
    })
}

fn write_sample_dir(out_dir: &Path) -> Result<()> {
    let dir = out_dir.join("samples");
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))
}

pub const DICTIONARY_FILE: &str = "dictionary.hfct";

/// Writes the dictionary tensor and `manifest.json` for records already on
/// disk. Returns the manifest path.
pub fn write_manifest(
    out_dir: &Path,
    records: Vec<SampleRecord>,
    config: &ExperimentConfig,
    dictionary: (&CMatrix, DictionaryMetadata),
    skipped_cells: Vec<[usize; 2]>,
) -> Result<PathBuf> {
    if records.is_empty() {
        return Err(Error::Validation("dataset has no samples".into()));
    }
    let mut ids = HashSet::new();
    for r in &records {
        if !ids.insert(r.id.as_str()) {
            return Err(Error::Validation(format!("duplicate sample id {:?}", r.id)));
        }
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_matrix(&out_dir.join(DICTIONARY_FILE), dictionary.0)?;
    let n_train = records.iter().filter(|r| r.split == Split::Train).count();
    let manifest = DatasetManifest {
        format: MANIFEST_FORMAT.into(),
        version: 1,
        config: config.clone(),
        dictionary: DictionaryRecord {
            path: DICTIONARY_FILE.into(),
            metadata: dictionary.1,
        },
        train_fraction: TRAIN_FRACTION,
        n_train,
        n_validation: records.len() - n_train,
        skipped_cells,
        samples: records,
    };
    let path = out_dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Validation(format!("manifest serialization: {e}")))?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes one noisy/clean/channel HFCT triple per sample, the dictionary and
/// `manifest.json` into `out_dir`. Returns the manifest path.
pub fn export_dataset(
    samples: &[DatasetSample],
    out_dir: &Path,
    config: &ExperimentConfig,
    dictionary: (&CMatrix, DictionaryMetadata),
    skipped_cells: Vec<[usize; 2]>,
) -> Result<PathBuf> {
    if samples.is_empty() {
        return Err(Error::Validation("dataset has no samples".into()));
    }
    let mut ids = HashSet::new();
    for s in samples {
        if !ids.insert(s.id.as_str()) {
            return Err(Error::Validation(format!("duplicate sample id {:?}", s.id)));
        }
        check_id(&s.id)?;
    }
    let records = samples
        .iter()
        .zip(assign_splits(samples))
        .map(|(s, split)| write_sample(out_dir, s, split))
        .collect::<Result<Vec<_>>>()?;
    write_manifest(out_dir, records, config, dictionary, skipped_cells)
}

impl DatasetManifest {
    /// Parses a manifest without touching the referenced tensors.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: Self = serde_json::from_str(&text).map_err(|e| {
            Error::Validation(format!(
                "{}: line {}, column {}: {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        })?;
        if manifest.format != MANIFEST_FORMAT {
            return Err(Error::Validation(format!(
                "{}: format {:?} is not {MANIFEST_FORMAT:?}",
                path.display(),
                manifest.format
            )));
        }
        Ok(manifest)
    }

    /// Checks id uniqueness and that every referenced tensor parses with the
    /// expected shape.
    pub fn validate(&self, base_dir: &Path) -> Result<()> {
        let mut ids = HashSet::new();
        for r in &self.samples {
            if !ids.insert(r.id.as_str()) {
                return Err(Error::Validation(format!("duplicate sample id {:?}", r.id)));
            }
        }
        let n = self.dictionary.metadata.n_antennas;
        let s = self.dictionary.metadata.n_columns;
        let m = self.config.system.n_subcarriers;
        let check = |rel: &str, expected: [usize; 2]| -> Result<()> {
            let p = Path::new(rel);
            if p.is_absolute() || p.components().any(|c| c == std::path::Component::ParentDir) {
                return Err(Error::Validation(format!("{rel}: paths must stay inside the dataset")));
            }
            let t = read_tensor(&base_dir.join(rel))?;
            if t.dims() != expected {
                return Err(Error::Validation(format!(
                    "{rel}: dims {:?}, expected {expected:?}",
                    t.dims()
                )));
            }
            Ok(())
        };
        check(&self.dictionary.path, [n, s])?;
        for r in &self.samples {
            check(&r.noisy_path, [s, m])?;
            check(&r.clean_path, [s, m])?;
            check(&r.channel_path, [n, m])?;
        }
        Ok(())
    }
}
