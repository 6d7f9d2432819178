//! CSV moment series and run digests.
//!
//! Column order is fixed: `time, m, w, alpha0_abs, m_o, m_d, norm_error`,
//! optionally followed by extra columns. Values are written with 17
//! significant digits so they round-trip exactly.

use std::path::Path;

use chainspread_core::analysis::MomentSeries;
use chainspread_core::chain::ChainSpec;
use chainspread_core::observables::MomentSample;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const COLUMNS: [&str; 7] = ["time", "m", "w", "alpha0_abs", "m_o", "m_d", "norm_error"];

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn sample_row(s: &MomentSample) -> [f64; 7] {
    [s.time, s.m, s.w, s.alpha0_abs, s.m_o, s.m_d, s.norm_error]
}

/// Streams rows to a CSV file under a fixed header.
pub struct TableWriter {
    inner: csv::Writer<std::fs::File>,
    width: usize,
    path: std::path::PathBuf,
}

impl TableWriter {
    pub fn create(path: &Path, extra_columns: &[&str]) -> CliResult<Self> {
        let mut inner = csv::Writer::from_path(path).map_err(|source| CliError::Csv {
            path: path.into(),
            source,
        })?;
        let header: Vec<&str> = COLUMNS.iter().chain(extra_columns).copied().collect();
        inner
            .write_record(&header)
            .map_err(|source| CliError::Csv {
                path: path.into(),
                source,
            })?;
        Ok(Self {
            inner,
            width: header.len(),
            path: path.into(),
        })
    }

    pub fn write(&mut self, sample: &MomentSample, extra: &[f64]) -> CliResult<()> {
        debug_assert_eq!(COLUMNS.len() + extra.len(), self.width);
        let record = sample_row(sample)
            .into_iter()
            .chain(extra.iter().copied())
            .map(format_value);
        self.inner
            .write_record(record)
            .map_err(|source| CliError::Csv {
                path: self.path.clone(),
                source,
            })
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.inner.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

pub fn write_series(path: &Path, series: &MomentSeries) -> CliResult<()> {
    let mut w = TableWriter::create(path, &[])?;
    for s in &series.samples {
        w.write(s, &[])?;
    }
    w.finish()
}

/// Reads a series written by `simulate` or `analytic`. Columns are located by
/// name; extra columns are ignored. The file name becomes the digest.
pub fn read_series(path: &Path) -> CliResult<MomentSeries> {
    let input_err = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => input_err(format!("cannot open: {e}")),
        _ => input_err(e.to_string()),
    })?;
    let headers = reader
        .headers()
        .map_err(|e| input_err(e.to_string()))?
        .clone();
    let mut index = [0usize; 7];
    for (slot, name) in index.iter_mut().zip(COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| input_err(format!("missing column `{name}`")))?;
    }

    let mut samples = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| input_err(e.to_string()))?;
        let mut v = [0.0; 7];
        for (k, &col) in index.iter().enumerate() {
            let field = record.get(col).unwrap_or("");
            v[k] = field.trim().parse().map_err(|_| {
                input_err(format!(
                    "row {}: column `{}` is not a number: {field:?}",
                    row + 2,
                    COLUMNS[k]
                ))
            })?;
        }
        samples.push(MomentSample {
            time: v[0],
            m: v[1],
            w: v[2],
            alpha0_abs: v[3],
            m_o: v[4],
            m_d: v[5],
            norm_error: v[6],
        });
    }
    if samples.is_empty() {
        return Err(input_err("no data rows".into()));
    }
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    MomentSeries::new(samples, name).map_err(|e| input_err(e.to_string()))
}

/// First 16 hex digits of SHA-256 over the chain spec JSON and the
/// realization index.
pub fn spec_digest(chain: &ChainSpec, realization_index: u64) -> String {
    let json = serde_json::to_string(chain).expect("chain spec serializes");
    let mut hasher = Sha256::new();
    hasher.update(json.as_bytes());
    hasher.update(b"#");
    hasher.update(realization_index.to_le_bytes());
    hasher
        .finalize()
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn series_file_name(realization_index: usize) -> String {
    format!("series_r{realization_index:04}.csv")
}
