use std::path::PathBuf;

use chainspread_core::analysis::{verify_bounds, MomentSeries};
use chainspread_core::bessel::{
    bessel_row, even_order_second_moment, recurrence_defect, squared_sum,
};
use serde::Serialize;

use super::analytic::analytic_series;
use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::series::read_series;

pub const VERIFY_REPORT_FILE: &str = "verify_report.json";

pub const NORM_TOLERANCE: f64 = 1e-9;
const MOMENT_TOLERANCE: f64 = 1e-6;
const RECURRENCE_TOLERANCE: f64 = 1e-10;
const SQUARED_SUM_TOLERANCE: f64 = 1e-12;

pub enum VerifySource<'a> {
    /// Ordered analytic series on the config's time grid.
    Config(&'a ExperimentConfig),
    Files(&'a [PathBuf]),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesAudit {
    pub input: String,
    pub rows: usize,
    pub lower_failures: usize,
    pub upper_failures: usize,
    pub upper_checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_lower_failure: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_upper_failure: Option<f64>,
    pub max_norm_error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub argument: f64,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub series: Vec<SeriesAudit>,
    pub identities: Vec<IdentityCheck>,
}

fn audit(series: &MomentSeries) -> SeriesAudit {
    let bounds = verify_bounds(series);
    let max_norm_error = series
        .samples
        .iter()
        .map(|s| s.norm_error)
        .fold(0.0, f64::max);
    SeriesAudit {
        input: series.spec_digest.clone(),
        rows: series.len(),
        lower_failures: bounds.lower_failures,
        upper_failures: bounds.upper_failures,
        upper_checked: bounds.upper_checked,
        first_lower_failure: bounds.rows.iter().find(|r| !r.lower_ok).map(|r| r.time),
        first_upper_failure: bounds.rows.iter().find(|r| !r.upper_ok).map(|r| r.time),
        max_norm_error,
        passed: bounds.passed() && max_norm_error <= NORM_TOLERANCE,
    }
}

fn check(name: &str, argument: f64, value: f64, expected: f64, tolerance: f64) -> IdentityCheck {
    IdentityCheck {
        name: name.into(),
        argument,
        value,
        expected,
        tolerance,
        passed: (value - expected).abs() <= tolerance,
    }
}

/// Bessel identity spot checks underlying the bound derivations.
pub fn identity_checks() -> CliResult<Vec<IdentityCheck>> {
    let mut out = Vec::new();
    for a in [2.0, 50.0, 100.0] {
        let k_max = a as usize + 90;
        let value = even_order_second_moment(a, k_max)?;
        out.push(check(
            "even_order_second_moment",
            a,
            value,
            a * a / 2.0,
            MOMENT_TOLERANCE,
        ));
    }
    for a in [2.0, 20.0, 100.0] {
        let row = bessel_row(2 * a as usize + 1, a)?;
        out.push(check(
            "recurrence",
            a,
            recurrence_defect(&row),
            0.0,
            RECURRENCE_TOLERANCE,
        ));
    }
    for a in [2.0, 50.0, 100.0] {
        let row = bessel_row(a as usize + 90, a)?;
        out.push(check(
            "squared_sum",
            a,
            squared_sum(&row),
            1.0,
            SQUARED_SUM_TOLERANCE,
        ));
    }
    Ok(out)
}

/// Bound checks and unitarity audit on each series, plus the identity suite.
/// Bound checks assume ordered-chain input.
pub fn run_verify(source: VerifySource<'_>) -> CliResult<VerifyReport> {
    let series = match source {
        VerifySource::Config(config) => vec![analytic_series(config)?],
        VerifySource::Files(paths) => paths
            .iter()
            .map(|p| read_series(p))
            .collect::<CliResult<_>>()?,
    };
    let audits: Vec<_> = series.iter().map(audit).collect();
    let identities = identity_checks()?;
    let passed = audits.iter().all(|a| a.passed) && identities.iter().all(|c| c.passed);
    Ok(VerifyReport {
        passed,
        series: audits,
        identities,
    })
}
