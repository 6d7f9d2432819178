use std::path::PathBuf;

use chainspread_core::analysis::{
    fit_power_law, local_exponent, time_average, Field, MomentSeries, PowerLawFit, Quartiles,
    DEFAULT_AVERAGE_WINDOW,
};
use serde::Serialize;

use crate::error::CliResult;
use crate::series::read_series;

pub const FIT_REPORT_FILE: &str = "fit_report.json";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Fit window; defaults to the last decade `[t_last / 10, t_last]`.
    pub window: Option<(f64, f64)>,
    pub field: Field,
    /// Averaging window width; zero fits the raw series.
    pub average_width: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            window: None,
            field: Field::M,
            average_width: DEFAULT_AVERAGE_WINDOW,
        }
    }
}

/// Quartiles of the centered-difference local exponent inside the fit window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalExponentSummary {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

/// Power-law exponent fitted on one octave `[t_lo, 2 t_lo]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OctaveFit {
    pub t_lo: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitEntry {
    pub input: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<PowerLawFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub local_exponent: Option<LocalExponentSummary>,
    /// Octaves ending at `t_last`, `t_last / 2`, ... down to the first sample.
    pub octaves: Vec<OctaveFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub count: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub field: Field,
    pub average_width: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<(f64, f64)>,
    pub entries: Vec<FitEntry>,
    /// Exponent statistics over the entries that fitted.
    pub ensemble: Option<EnsembleSummary>,
    pub failures: usize,
}

impl FitReport {
    pub fn new(opts: &FitOptions, entries: Vec<FitEntry>) -> Self {
        let exponents: Vec<f64> = entries
            .iter()
            .filter_map(|e| e.fit.map(|f| f.exponent))
            .collect();
        let ensemble = Quartiles::of(&exponents).map(|q| EnsembleSummary {
            count: exponents.len(),
            median: q.median,
            q1: q.q1,
            q3: q.q3,
            iqr: q.iqr(),
            min: exponents.iter().copied().fold(f64::INFINITY, f64::min),
            max: exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        });
        Self {
            field: opts.field,
            average_width: opts.average_width,
            window: opts.window,
            failures: entries.iter().filter(|e| e.fit.is_none()).count(),
            entries,
            ensemble,
        }
    }

    pub fn exponents(&self) -> Vec<f64> {
        self.entries
            .iter()
            .filter_map(|e| e.fit.map(|f| f.exponent))
            .collect()
    }
}

fn local_summary(
    series: &MomentSeries,
    field: Field,
    window: (f64, f64),
) -> Option<LocalExponentSummary> {
    let positive: Vec<_> = series
        .samples
        .iter()
        .filter(|s| s.time > 0.0 && field.get(s) > 0.0)
        .cloned()
        .collect();
    let positive = MomentSeries::new(positive, series.spec_digest.clone()).ok()?;
    let slopes: Vec<f64> = local_exponent(&positive, field)
        .ok()?
        .into_iter()
        .filter(|&(t, _)| t >= window.0 && t <= window.1)
        .map(|p| p.1)
        .collect();
    let q = Quartiles::of(&slopes)?;
    Some(LocalExponentSummary {
        q1: q.q1,
        median: q.median,
        q3: q.q3,
    })
}

fn octave_fits(series: &MomentSeries, field: Field, t_last: f64) -> Vec<OctaveFit> {
    let Some(t_first) = series.samples.iter().map(|s| s.time).find(|&t| t > 0.0) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut t_lo = 0.5 * t_last;
    while t_lo >= t_first {
        if let Ok(fit) = fit_power_law(series, field, (t_lo, 2.0 * t_lo)) {
            out.push(OctaveFit {
                t_lo,
                exponent: fit.exponent,
            });
        }
        t_lo *= 0.5;
    }
    out
}

/// Averages, then fits one series. Failures are recorded in the entry.
pub fn fit_series(name: &str, series: &MomentSeries, opts: &FitOptions) -> FitEntry {
    let mut entry = FitEntry {
        input: name.into(),
        fit: None,
        local_exponent: None,
        octaves: Vec::new(),
        error: None,
    };
    let averaged = if opts.average_width > 0.0 {
        match time_average(series, opts.average_width) {
            Ok(a) => a,
            Err(e) => {
                entry.error = Some(e.to_string());
                return entry;
            }
        }
    } else {
        series.clone()
    };
    let t_last = series.samples.last().map_or(0.0, |s| s.time);
    let window = opts.window.unwrap_or((0.1 * t_last, t_last));
    match fit_power_law(&averaged, opts.field, window) {
        Ok(fit) => entry.fit = Some(fit),
        Err(e) => entry.error = Some(e.to_string()),
    }
    entry.local_exponent = local_summary(&averaged, opts.field, window);
    entry.octaves = octave_fits(&averaged, opts.field, t_last);
    entry
}

/// Reads and fits every input. Unreadable inputs abort with an input error.
pub fn fit_files(inputs: &[PathBuf], opts: &FitOptions) -> CliResult<FitReport> {
    let mut entries = Vec::with_capacity(inputs.len());
    for path in inputs {
        let series = read_series(path)?;
        let name = series.spec_digest.clone();
        entries.push(fit_series(&name, &series, opts));
    }
    Ok(FitReport::new(opts, entries))
}
