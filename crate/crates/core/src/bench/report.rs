use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use super::eval::CSV_HEADER;
use super::stats::SummaryRow;
use crate::config::DictionaryKind;
use crate::error::{Error, Result};

/// Parses an eval CSV; the header must match exactly and the body must hold
/// at least one row.
pub fn parse_summary_csv<R: Read>(input: R, source: &str) -> Result<Vec<SummaryRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| Error::Validation(format!("{source}: {e}")))?
        .clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::Validation(format!(
            "{source}: header {:?}, expected {}",
            headers.iter().collect::<Vec<_>>(),
            CSV_HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, row) in reader.deserialize::<SummaryRow>().enumerate() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(i as u64 + 2, |p| p.line());
            Error::Validation(format!("{source}: line {line}: {e}"))
        })?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Validation(format!("{source}: no data rows")));
    }
    Ok(rows)
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_summary_csv(file, &path.display().to_string())
}

/// File stem of one series, e.g. `polar_omp-denoiser_rf08_q04`.
pub fn series_name(dictionary: DictionaryKind, method: &str, n_rf: usize, n_pilots: usize) -> String {
    let tag: String = method
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
        .collect();
    format!("{dictionary}_{tag}_rf{n_rf:02}_q{n_pilots:02}")
}

/// Writes one `snr_db,nmse_db_mean,nmse_db_stderr` file per
/// (dictionary, method, N_RF, Q) series, rows sorted by SNR. Returns the
/// written paths in series order.
pub fn write_series(rows: &[SummaryRow], out_dir: &Path) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(Error::Validation("no rows to report".into()));
    }
    let mut series: BTreeMap<(DictionaryKind, &str, usize, usize), Vec<&SummaryRow>> = BTreeMap::new();
    for r in rows {
        series
            .entry((r.dictionary, r.method.as_str(), r.n_rf, r.n_pilots))
            .or_default()
            .push(r);
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::with_capacity(series.len());
    for ((dictionary, method, n_rf, n_pilots), mut points) in series {
        points.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
        let mut text = String::from("snr_db,nmse_db_mean,nmse_db_stderr\n");
        for p in points {
            text.push_str(&format!("{},{},{}\n", p.snr_db, p.nmse_db_mean, p.nmse_db_stderr));
        }
        let path = out_dir.join(format!("{}.csv", series_name(dictionary, method, n_rf, n_pilots)));
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "snr_db,n_rf,n_pilots,dictionary,method,nmse_db_mean,nmse_db_stderr\n";

    #[test]
    fn empty_body_is_an_error() {
        assert!(parse_summary_csv(HEADER.as_bytes(), "t").is_err());
        assert!(parse_summary_csv("".as_bytes(), "t").is_err());
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = format!("{HEADER}0,8,4,polar,omp,-1,0.1\n2,x,4,polar,omp,-1,0.1\n");
        let err = parse_summary_csv(text.as_bytes(), "t").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        let text = "snr,n_rf\n1,2\n";
        assert!(parse_summary_csv(text.as_bytes(), "t").is_err());
    }

    #[test]
    fn one_file_per_nrf_and_method() {
        let mut text = HEADER.to_string();
        for n_rf in [8, 12, 16] {
            for snr in [2, -2] {
                text.push_str(&format!("{snr},{n_rf},4,polar,omp,-1,0.1\n"));
            }
        }
        text.push_str("0,8,4,polar,omp+denoiser,-5,0.1\n");
        let rows = parse_summary_csv(text.as_bytes(), "t").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = write_series(&rows, dir.path()).unwrap();
        let names: Vec<String> = files
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(
            names,
            [
                "polar_omp_rf08_q04.csv",
                "polar_omp_rf12_q04.csv",
                "polar_omp_rf16_q04.csv",
                "polar_omp-denoiser_rf08_q04.csv"
            ]
        );
        let body = fs::read_to_string(&files[0]).unwrap();
        assert_eq!(body, "snr_db,nmse_db_mean,nmse_db_stderr\n-2,-1,0.1\n2,-1,0.1\n");
    }
}
