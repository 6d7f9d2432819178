use std::path::{Path, PathBuf};
use std::time::Instant;

use chainspread_core::analysis::{fit_emission, MomentSeries};
use chainspread_core::analytic::EmissionModel;
use chainspread_core::chain::{build_hamiltonian, realization_seed, ChainSpec};
use chainspread_core::observables::moment_m;
use chainspread_core::propagator::{check_boundary_budget, evolve_series_with, BudgetViolation};
use serde::Serialize;

use super::fit::{fit_series, FitOptions, FitReport, FIT_REPORT_FILE};
use super::{output_dir, write_json};
use crate::config::{ExperimentConfig, OutputFormat};
use crate::error::{CliError, CliResult};
use crate::series::{series_file_name, spec_digest, write_series};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SWEEP_MANIFEST_FILE: &str = "sweep_manifest.json";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub allow_reflections: bool,
    pub seed: Option<u64>,
    /// Worker threads for `sweep`; `simulate` always runs serially.
    pub jobs: usize,
    pub window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetRecord {
    pub t_max: f64,
    pub required: f64,
    pub available: f64,
}

impl From<BudgetViolation> for BudgetRecord {
    fn from(v: BudgetViolation) -> Self {
        Self {
            t_max: v.t_max,
            required: v.required,
            available: v.available,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmissionFitRecord {
    /// Lead site offset beyond the core boundary.
    pub site: i64,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<EmissionModel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizationRecord {
    pub index: usize,
    /// Seed of the disorder stream actually drawn for this realization.
    pub stream_seed: u64,
    pub digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    pub rows: usize,
    pub max_norm_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emission_fit: Option<EmissionFitRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureRecord {
    pub index: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub num_times: usize,
    pub budget_violation: Option<BudgetRecord>,
    pub realizations: Vec<RealizationRecord>,
    pub failures: Vec<FailureRecord>,
    pub wall_time_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub manifest: RunManifest,
    pub report: FitReport,
}

struct Plan {
    chain: ChainSpec,
    times: Vec<f64>,
    dir: PathBuf,
    budget: Option<BudgetRecord>,
}

fn plan(config: &ExperimentConfig, opts: &RunOptions) -> CliResult<Plan> {
    let chain = config.effective_chain(opts.seed);
    let times = config.sample_times();
    let violation = check_boundary_budget(
        chain.num_sites,
        chain.origin(),
        chain.disorder.half_width,
        *times.last().expect("at least one sample"),
    );
    if let Some(v) = violation {
        if !opts.allow_reflections {
            return Err(CliError::Budget(v));
        }
    }
    let dir = output_dir(config, opts.out.as_deref())?;
    Ok(Plan {
        chain,
        times,
        dir,
        budget: violation.map(Into::into),
    })
}

/// One realization end to end: Hamiltonian, propagation, moments, CSV,
/// optional emission fit.
fn run_realization(
    config: &ExperimentConfig,
    plan: &Plan,
    index: usize,
) -> CliResult<(RealizationRecord, MomentSeries)> {
    let chain = &plan.chain;
    let h = build_hamiltonian(chain, index as u64)?;
    let origin = chain.origin();
    let half_width = chain.disorder.half_width;

    let lead_site = config
        .emission
        .as_ref()
        .map(|e| origin as i64 + half_width as i64 + e.site);
    let mut lead_trace = Vec::new();
    let mut origin_trace = Vec::new();
    let mut samples = Vec::with_capacity(plan.times.len());
    evolve_series_with(&h, origin, &plan.times, half_width, |state| {
        let sample = moment_m(state, half_width);
        if let Some(site) = lead_site {
            if (site as usize) < state.num_sites() {
                lead_trace.push((state.time, state.amplitudes[site as usize].norm()));
                origin_trace.push((state.time, sample.alpha0_abs));
            }
        }
        samples.push(sample);
        Ok(())
    })?;

    let digest = spec_digest(chain, index as u64);
    let series = MomentSeries::new(samples, digest.clone())?;
    let file = if config.outputs.wants(OutputFormat::Csv) {
        let name = series_file_name(index);
        write_series(&plan.dir.join(&name), &series)?;
        Some(name)
    } else {
        None
    };

    let emission_fit = config.emission.as_ref().map(|seed| {
        let horizon = seed.fit_until;
        let lead: Vec<_> = lead_trace
            .iter()
            .copied()
            .filter(|p| p.0 <= horizon)
            .collect();
        let core: Vec<_> = origin_trace
            .iter()
            .copied()
            .filter(|p| p.0 <= horizon)
            .collect();
        let result = if lead.is_empty() {
            Err(format!(
                "lead site {} lies outside the chain or the fit horizon",
                seed.site
            ))
        } else {
            config
                .emission_model(seed)
                .and_then(|init| fit_emission(&lead, seed.site, &init, Some(&core)))
                .map_err(|e| e.to_string())
        };
        EmissionFitRecord {
            site: seed.site,
            samples: lead.len(),
            model: result.as_ref().ok().copied(),
            error: result.err(),
        }
    });

    let record = RealizationRecord {
        index,
        stream_seed: realization_seed(chain.disorder.seed, index as u64),
        digest,
        file,
        rows: series.len(),
        max_norm_error: series
            .samples
            .iter()
            .map(|s| s.norm_error)
            .fold(0.0, f64::max),
        emission_fit,
    };
    Ok((record, series))
}

fn manifest(
    command: &str,
    config: &ExperimentConfig,
    plan: &Plan,
    realizations: Vec<RealizationRecord>,
    failures: Vec<FailureRecord>,
    started: Instant,
) -> RunManifest {
    RunManifest {
        command: command.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        seed: plan.chain.disorder.seed,
        num_times: plan.times.len(),
        budget_violation: plan.budget,
        realizations,
        failures,
        wall_time_seconds: started.elapsed().as_secs_f64(),
    }
}

fn write_manifest(
    config: &ExperimentConfig,
    dir: &Path,
    name: &str,
    m: &RunManifest,
) -> CliResult<()> {
    if config.outputs.wants(OutputFormat::Json) {
        write_json(&dir.join(name), m)?;
    }
    Ok(())
}

/// Runs every realization serially; the first failure aborts the run.
pub fn run_simulate(config: &ExperimentConfig, opts: &RunOptions) -> CliResult<RunManifest> {
    let started = Instant::now();
    let plan = plan(config, opts)?;
    let mut records = Vec::with_capacity(config.ensemble.num_realizations);
    for index in 0..config.ensemble.num_realizations {
        let (record, _) = run_realization(config, &plan, index)?;
        log::info!("realization {index} done ({} rows)", record.rows);
        records.push(record);
    }
    let m = manifest("simulate", config, &plan, records, Vec::new(), started);
    write_manifest(config, &plan.dir, MANIFEST_FILE, &m)?;
    Ok(m)
}

/// Runs realizations on `opts.jobs` threads, then fits each series.
/// Results land in slots keyed by realization index, so outputs do not depend
/// on scheduling. Failed realizations are listed in the manifest.
pub fn run_sweep(config: &ExperimentConfig, opts: &RunOptions) -> CliResult<SweepOutcome> {
    use rayon::prelude::*;

    let started = Instant::now();
    let plan = plan(config, opts)?;
    let jobs = opts.jobs.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("--jobs {jobs}: {e}")))?;
    let slots: Vec<CliResult<(RealizationRecord, MomentSeries)>> = pool.install(|| {
        (0..config.ensemble.num_realizations)
            .into_par_iter()
            .map(|index| run_realization(config, &plan, index))
            .collect()
    });

    let fit_opts = FitOptions {
        window: opts.window,
        ..FitOptions::default()
    };
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut entries = Vec::new();
    for (index, slot) in slots.into_iter().enumerate() {
        match slot {
            Ok((record, series)) => {
                entries.push(fit_series(&series_file_name(index), &series, &fit_opts));
                records.push(record);
            }
            Err(e) => {
                log::error!("realization {index} failed: {e}");
                failures.push(FailureRecord {
                    index,
                    error: e.to_string(),
                });
            }
        }
    }
    let report = FitReport::new(&fit_opts, entries);
    let m = manifest("sweep", config, &plan, records, failures, started);
    if config.outputs.wants(OutputFormat::Json) {
        write_json(&plan.dir.join(FIT_REPORT_FILE), &report)?;
    }
    write_manifest(config, &plan.dir, SWEEP_MANIFEST_FILE, &m)?;
    Ok(SweepOutcome {
        manifest: m,
        report,
    })
}
