mod analytic;
mod fit;
mod simulate;
mod verify;

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

pub use analytic::{run_analytic, ANALYTIC_EXTRA_COLUMNS, ANALYTIC_FILE};
pub use fit::{
    fit_files, fit_series, FitEntry, FitOptions, FitReport, LocalExponentSummary, OctaveFit,
    FIT_REPORT_FILE,
};
pub use simulate::{
    run_simulate, run_sweep, EmissionFitRecord, RealizationRecord, RunManifest, RunOptions,
    SweepOutcome, MANIFEST_FILE, SWEEP_MANIFEST_FILE,
};
pub use verify::{
    run_verify, IdentityCheck, SeriesAudit, VerifyReport, VerifySource, VERIFY_REPORT_FILE,
};

/// Output directory: the `--out` flag if given, else the config's.
pub(crate) fn output_dir(config: &ExperimentConfig, out: Option<&Path>) -> CliResult<PathBuf> {
    let dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(&config.outputs.directory));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    Ok(dir)
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json {
        path: path.into(),
        source,
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub(crate) fn parse_window(text: &str) -> Option<(f64, f64)> {
    let (lo, hi) = text.split_once(':')?;
    let lo: f64 = lo.trim().parse().ok()?;
    let hi: f64 = hi.trim().parse().ok()?;
    (lo.is_finite() && hi.is_finite() && lo < hi).then_some((lo, hi))
}

/// Parses `LO:HI` for `--window`.
pub fn window_arg(text: &str) -> Result<(f64, f64), String> {
    parse_window(text).ok_or_else(|| format!("expected LO:HI with LO < HI, got {text:?}"))
}
