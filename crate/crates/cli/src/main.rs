// SPDX-License-Identifier: MIT OR Apache-2.0

//! `prutf`: change point detection for piecewise polynomial signals.
//!
//! Change points are reported 1-based: a change point `t` means the
//! segment ends at observation `t` and a new one starts at `t + 1`.
//!
//! Exit codes: 0 success, 2 malformed input or unknown scenario,
//! 3 zero noise scale estimate, 4 event cap exceeded, 1 anything else.

#![forbid(unsafe_code)]

mod input;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use prutf::sim::{replicate_rng, run_experiment, standard_normals, ExperimentConfig, Scenario, SCENARIO_NAMES};
use prutf::{detect, DetectConfig, Method, NoiseScale, PathConfig, PathSolver, PrutfError, StoppingConfig};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "prutf", version, about = "Trend-filtering change point detection (PRUTF / mPRUTF)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Detect change points in a CSV series (1-based output indices).
    Detect(DetectArgs),
    /// Run a Monte Carlo experiment on a named or file-defined scenario.
    Simulate(SimulateArgs),
    /// Time path construction on pure-noise input across sizes.
    Bench(BenchArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum MethodArg {
    Prutf,
    Mprutf,
}

impl MethodArg {
    fn method(self) -> Method {
        match self {
            Self::Prutf => Method::Prutf,
            Self::Mprutf => Method::Mprutf,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Self::Prutf => "prutf",
            Self::Mprutf => "mprutf",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct DetectArgs {
    /// CSV with values in the first column and an optional index in the second.
    #[arg(short, long)]
    input: PathBuf,
    /// Polynomial order of the segments (0 = piecewise constant).
    #[arg(short = 'r', long, default_value_t = 0)]
    order: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Noise standard deviation, or `mad` to estimate it.
    #[arg(long, default_value = "mad")]
    sigma: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Mprutf)]
    method: MethodArg,
    /// Event cap for the path (default 5n).
    #[arg(long)]
    max_steps: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// `json` for the full result, `csv` for a plot-ready t,y,fitted,change table.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Built-in scenario name.
    #[arg(long, conflicts_with = "scenario_file", required_unless_present = "scenario_file")]
    scenario: Option<String>,
    /// Scenario definition in TOML.
    #[arg(long)]
    scenario_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MethodArg::Mprutf)]
    method: MethodArg,
    #[arg(long, default_value_t = 100)]
    replicates: usize,
    /// Comma-separated noise levels; defaults to the scenario's own.
    #[arg(long, value_delimiter = ',')]
    sigma_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Estimate sigma by MAD in every replicate instead of using the true value.
    #[arg(long)]
    estimate_sigma: bool,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: PRUTF_THREADS, then all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Aggregate CSV; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Per-replicate CSV.
    #[arg(long)]
    detail: Option<PathBuf>,
    /// Report zero runtimes so output depends on the seed only.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Comma-separated signal lengths.
    #[arg(long, value_delimiter = ',', default_value = "250,500,1000,2000")]
    sizes: Vec<usize>,
    #[arg(short = 'r', long, default_value_t = 0)]
    order: usize,
    /// Timed runs per size; the fastest is reported.
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

/// An error carrying its process exit code.
#[derive(Debug)]
struct Exit(u8, anyhow::Error);

fn classify(err: anyhow::Error) -> Exit {
    let code = match err.downcast_ref::<PrutfError>() {
        Some(PrutfError::DegenerateScale) => 3,
        Some(PrutfError::CapExceeded { .. }) => 4,
        Some(_) => 2,
        None if err.downcast_ref::<std::io::Error>().is_some() => 1,
        None => 2,
    };
    Exit(code, err)
}

fn parse_sigma(text: &str) -> Result<NoiseScale> {
    if text.eq_ignore_ascii_case("mad") {
        return Ok(NoiseScale::Mad);
    }
    match text.parse::<f64>() {
        Ok(s) if s.is_finite() && s > 0.0 => Ok(NoiseScale::Known(s)),
        _ => bail!("--sigma must be a positive number or `mad`, got `{text}`"),
    }
}

fn cmd_detect(args: &DetectArgs) -> Result<(), Exit> {
    let sigma = parse_sigma(&args.sigma).map_err(classify)?;
    let stopping = StoppingConfig {
        alpha: args.alpha,
        sigma,
        ..StoppingConfig::default()
    };
    stopping.validate().map_err(|e| classify(e.into()))?;
    let series = input::read_series(&args.input).map_err(|e| Exit(2, e))?;
    let cfg = DetectConfig {
        stopping,
        method: args.method.method(),
        max_events: args.max_steps,
    };
    let res = detect(&series.values, args.order, &cfg).map_err(|e| classify(e.into()))?;
    let write = || -> Result<()> {
        let mut out = output::sink(args.output.as_deref())?;
        match args.format {
            Format::Json => {
                let source = if matches!(sigma, NoiseScale::Mad) { "mad" } else { "given" };
                let report = output::DetectReport::new(
                    &res,
                    args.order,
                    (args.method.name(), args.alpha, source),
                    series.index.as_deref(),
                );
                serde_json::to_writer_pretty(&mut out, &report)?;
                writeln!(out)?;
            }
            Format::Csv => output::write_detect_csv(&mut out, &series.values, &res)?,
        }
        out.flush()?;
        Ok(())
    };
    write().map_err(|e| Exit(1, e))
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), Exit> {
    let scenario = match (&args.scenario, &args.scenario_file) {
        (Some(name), _) => Scenario::by_name(name).ok_or_else(|| {
            Exit(
                2,
                anyhow::anyhow!("unknown scenario `{name}`; choose one of {}", SCENARIO_NAMES.join(", ")),
            )
        })?,
        (None, Some(path)) => Scenario::load(path).map_err(|e| classify(e.into()))?,
        (None, None) => unreachable!("clap requires one scenario source"),
    };
    let cfg = ExperimentConfig {
        method: args.method.method(),
        replicates: args.replicates,
        sigma_grid: args.sigma_grid.clone().unwrap_or_else(|| vec![scenario.noise.sigma()]),
        alpha: args.alpha,
        estimate_sigma: args.estimate_sigma,
        seed: args.seed,
        threads: args.threads,
        timing: !args.no_timing,
    };
    let report = run_experiment(&scenario, &cfg).map_err(|e| classify(e.into()))?;
    let write = || -> Result<()> {
        let mut out = output::sink(args.output.as_deref())?;
        output::write_aggregate_csv(&mut out, &report)?;
        out.flush()?;
        if let Some(path) = &args.detail {
            let mut d = output::sink(Some(path))?;
            output::write_detail_csv(&mut d, &report)?;
            d.flush()?;
        }
        Ok(())
    };
    write().map_err(|e| Exit(1, e))
}

#[derive(Serialize)]
struct BenchRow {
    n: usize,
    events: usize,
    path_seconds: f64,
    seconds_per_event: f64,
    events_per_second: f64,
    detect_seconds: f64,
}

fn cmd_bench(args: &BenchArgs) -> Result<(), Exit> {
    if args.sizes.is_empty() || args.repeats == 0 {
        return Err(Exit(2, anyhow::anyhow!("need at least one size and one repeat")));
    }
    let mut rows = Vec::new();
    for &n in &args.sizes {
        let y = standard_normals(&mut replicate_rng(args.seed, n as u64), n);
        let (mut path_best, mut detect_best, mut events) = (f64::INFINITY, f64::INFINITY, 0);
        for _ in 0..args.repeats {
            let start = Instant::now();
            let path = PathSolver::new(&y, args.order, PathConfig::default())
                .and_then(PathSolver::run_to_end)
                .map_err(|e| classify(e.into()))?;
            path_best = path_best.min(start.elapsed().as_secs_f64());
            events = path.events().len();
            let start = Instant::now();
            let cfg = DetectConfig {
                stopping: StoppingConfig {
                    sigma: NoiseScale::Known(1.0),
                    ..StoppingConfig::default()
                },
                ..DetectConfig::default()
            };
            detect(&y, args.order, &cfg).map_err(|e| classify(e.into()))?;
            detect_best = detect_best.min(start.elapsed().as_secs_f64());
        }
        let per_event = path_best / events.max(1) as f64;
        rows.push(BenchRow {
            n,
            events,
            path_seconds: path_best,
            seconds_per_event: per_event,
            events_per_second: events as f64 / path_best,
            detect_seconds: detect_best,
        });
    }
    let write = || -> Result<()> {
        let mut out = output::sink(None)?;
        if args.json {
            serde_json::to_writer_pretty(&mut out, &rows)?;
            writeln!(out)?;
        } else {
            writeln!(out, "{:>8} {:>8} {:>12} {:>14} {:>12} {:>12}", "n", "events", "path_s", "s/event", "events/s", "detect_s")?;
            for r in &rows {
                writeln!(
                    out,
                    "{:>8} {:>8} {:>12.6} {:>14.3e} {:>12.0} {:>12.6}",
                    r.n, r.events, r.path_seconds, r.seconds_per_event, r.events_per_second, r.detect_seconds
                )?;
            }
        }
        out.flush().context("writing benchmark table")
    };
    write().map_err(|e| Exit(1, e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Detect(a) => cmd_detect(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit(code, err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}
