use std::path::PathBuf;
use std::process::ExitCode;

use chainspread::commands::{
    self, fit_files, run_analytic, run_simulate, run_sweep, run_verify, FitOptions, RunOptions,
    VerifySource, FIT_REPORT_FILE, VERIFY_REPORT_FILE,
};
use chainspread::{CliError, CliResult, ExperimentConfig};
use chainspread_core::analysis::{Field, DEFAULT_AVERAGE_WINDOW};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Entanglement spreading in single-excitation spin chains.
#[derive(Parser)]
#[command(name = "chainspread", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate every realization and write one CSV per realization plus a manifest.
    Simulate(RunArgs),
    /// Ordered-chain series from the closed-form solution, with bound and asymptote columns.
    Analytic {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Average and fit power laws to CSV series; prints a JSON report.
    Fit {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_parser = commands::window_arg)]
        window: Option<(f64, f64)>,
        #[arg(long, value_enum, default_value = "m")]
        field: FieldArg,
        /// Averaging window width (0 disables averaging).
        #[arg(long, default_value_t = DEFAULT_AVERAGE_WINDOW)]
        average: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bound, identity and unitarity checks; exits 1 if any fails.
    Verify {
        #[arg(long, conflicts_with = "inputs", required_unless_present = "inputs")]
        config: Option<PathBuf>,
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ensemble run on a thread pool followed by per-realization fits.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_parser = commands::window_arg)]
        window: Option<(f64, f64)>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run even when the wavefront can reach the chain ends.
    #[arg(long)]
    allow_reflections: bool,
    /// Overrides the disorder seed from the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    M,
    W,
}

fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("report serializes")
    );
}

fn write_report<T: Serialize>(out: Option<PathBuf>, name: &str, value: &T) -> CliResult<()> {
    if let Some(dir) = out {
        std::fs::create_dir_all(&dir).map_err(|e| CliError::Io {
            path: dir.clone(),
            source: e,
        })?;
        let path = dir.join(name);
        let text = serde_json::to_string_pretty(value).expect("report serializes") + "\n";
        std::fs::write(&path, text).map_err(|e| CliError::Io { path, source: e })?;
    }
    Ok(())
}

fn run_options(
    args: RunArgs,
    jobs: usize,
    window: Option<(f64, f64)>,
) -> CliResult<(ExperimentConfig, RunOptions)> {
    let config = ExperimentConfig::load(&args.config)?;
    let opts = RunOptions {
        out: args.out,
        allow_reflections: args.allow_reflections,
        seed: args.seed,
        jobs,
        window,
    };
    Ok((config, opts))
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(args) => {
            let (config, opts) = run_options(args, 1, None)?;
            let manifest = run_simulate(&config, &opts)?;
            for r in &manifest.realizations {
                println!(
                    "realization {} digest {} rows {}",
                    r.index, r.digest, r.rows
                );
            }
        }
        Command::Analytic { config, out } => {
            let config = ExperimentConfig::load(&config)?;
            let (series, path) = run_analytic(&config, out.as_deref())?;
            match path {
                Some(p) => println!("{} rows written to {}", series.len(), p.display()),
                None => println!("{} rows computed (csv output disabled)", series.len()),
            }
        }
        Command::Fit {
            inputs,
            window,
            field,
            average,
            out,
        } => {
            if !(average >= 0.0 && average.is_finite()) {
                return Err(CliError::Config(format!(
                    "--average must be >= 0, got {average}"
                )));
            }
            let field = match field {
                FieldArg::M => Field::M,
                FieldArg::W => Field::W,
            };
            let report = fit_files(
                &inputs,
                &FitOptions {
                    window,
                    field,
                    average_width: average,
                },
            )?;
            print_json(&report);
            write_report(out, FIT_REPORT_FILE, &report)?;
            if report.ensemble.is_none() {
                return Err(CliError::ChecksFailed("no input could be fitted".into()));
            }
        }
        Command::Verify {
            config,
            inputs,
            out,
        } => {
            let loaded;
            let source = match config {
                Some(path) => {
                    loaded = ExperimentConfig::load(&path)?;
                    VerifySource::Config(&loaded)
                }
                None => VerifySource::Files(&inputs),
            };
            let report = run_verify(source)?;
            print_json(&report);
            write_report(out, VERIFY_REPORT_FILE, &report)?;
            if !report.passed {
                return Err(CliError::ChecksFailed("verification failed".into()));
            }
        }
        Command::Sweep { run, jobs, window } => {
            if jobs == 0 {
                return Err(CliError::Config("--jobs must be >= 1".into()));
            }
            let (config, opts) = run_options(run, jobs, window)?;
            let outcome = run_sweep(&config, &opts)?;
            print_json(&outcome.report);
            if !outcome.manifest.failures.is_empty() {
                return Err(CliError::ChecksFailed(format!(
                    "{} of {} realizations failed",
                    outcome.manifest.failures.len(),
                    config.ensemble.num_realizations
                )));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
