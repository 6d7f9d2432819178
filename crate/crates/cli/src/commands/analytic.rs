use std::path::{Path, PathBuf};

use chainspread_core::analysis::MomentSeries;
use chainspread_core::analytic::{asymptotes_ordered, infinite_chain_state, w_bounds_ordered};
use chainspread_core::observables::moment_m;

use super::output_dir;
use crate::config::{ExperimentConfig, OutputFormat};
use crate::error::{CliError, CliResult};
use crate::series::TableWriter;

pub const ANALYTIC_FILE: &str = "analytic.csv";

/// Columns appended after the standard series columns.
pub const ANALYTIC_EXTRA_COLUMNS: [&str; 4] = ["w_lower", "w_upper", "w_asymptote", "m_asymptote"];

pub(crate) fn analytic_series(config: &ExperimentConfig) -> CliResult<MomentSeries> {
    if !config.chain.disorder.is_ordered() {
        return Err(CliError::Config(
            "analytic mode requires ordered chain".into(),
        ));
    }
    let half_width = config.chain.disorder.half_width;
    let samples = config
        .sample_times()
        .into_iter()
        .map(|t| infinite_chain_state(t).map(|s| moment_m(&s, half_width)))
        .collect::<chainspread_core::Result<Vec<_>>>()?;
    Ok(MomentSeries::new(samples, "analytic")?)
}

/// Infinite ordered chain from the Bessel solution, with bound and asymptote
/// columns. Returns the series and the CSV path, if one was written.
pub fn run_analytic(
    config: &ExperimentConfig,
    out: Option<&Path>,
) -> CliResult<(MomentSeries, Option<PathBuf>)> {
    let series = analytic_series(config)?;
    if !config.outputs.wants(OutputFormat::Csv) {
        return Ok((series, None));
    }
    let path = output_dir(config, out)?.join(ANALYTIC_FILE);
    let mut writer = TableWriter::create(&path, &ANALYTIC_EXTRA_COLUMNS)?;
    for s in &series.samples {
        let (lower, upper) = w_bounds_ordered(s.time);
        let (w_asym, m_asym) = asymptotes_ordered(s.time);
        writer.write(s, &[lower, upper, w_asym, m_asym])?;
    }
    writer.finish()?;
    Ok((series, Some(path)))
}
