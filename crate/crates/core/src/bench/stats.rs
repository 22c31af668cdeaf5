use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::DictionaryKind;

/// One scored sample.
#[derive(Debug, Clone, PartialEq)]
pub struct NmseRecord {
    pub snr_db: f64,
    pub n_rf: usize,
    pub n_pilots: usize,
    pub dictionary: DictionaryKind,
    pub method: String,
    pub nmse_db: f64,
}

/// One output row: mean and standard error of the per-sample NMSE in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub snr_db: f64,
    pub n_rf: usize,
    pub n_pilots: usize,
    pub dictionary: DictionaryKind,
    pub method: String,
    pub nmse_db_mean: f64,
    pub nmse_db_stderr: f64,
    #[serde(skip)]
    pub n_samples: usize,
}

/// `(mean, sample std / sqrt(n))`; the standard error is 0 for one value.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Groups by (dictionary, method, n_rf, n_pilots, snr) and sorts the rows in
/// that order.
pub fn summarize(records: &[NmseRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(DictionaryKind, String, usize, usize, i64), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.dictionary, r.method.clone(), r.n_rf, r.n_pilots, ordered(r.snr_db)))
            .or_default()
            .push(r.nmse_db);
    }
    groups
        .into_iter()
        .map(|((dictionary, method, n_rf, n_pilots, snr), values)| {
            let (mean, se) = mean_stderr(&values);
            SummaryRow {
                snr_db: unordered(snr),
                n_rf,
                n_pilots,
                dictionary,
                method,
                nmse_db_mean: mean,
                nmse_db_stderr: se,
                n_samples: values.len(),
            }
        })
        .collect()
}

// Order-preserving map from f64 to i64 (total order, -0 before +0).
fn ordered(x: f64) -> i64 {
    let bits = x.to_bits() as i64;
    bits ^ (((bits >> 63) as u64) >> 1) as i64
}

fn unordered(k: i64) -> f64 {
    f64::from_bits((k ^ (((k >> 63) as u64) >> 1) as i64) as u64)
}
