//! Command-line front end.
//!
//! Exit codes: `0` success, `1` runtime failure, `2` usage error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::algorithms::{check_overrides, parameter_keys, ALGORITHM_NAMES};
use crate::bench::{self, aggregate, cumulative_regret, ExperimentConfig};
use crate::error::Result;
use crate::objectives::{objective_from_name, Noise, OBJECTIVE_NAMES};
use crate::partition::PartitionKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "xarmed", version, about = "X-armed bandit benchmark runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run seeded experiments and write regret curves.
    Run(RunArgs),
    /// Print the algorithm, objective and partition registries.
    List,
    /// Evaluate an objective on a regular grid.
    DumpObjective(DumpArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseKind {
    Gaussian,
    Uniform,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Algorithm name (see `list`).
    #[arg(long)]
    algo: String,
    /// Objective name.
    #[arg(long)]
    objective: String,
    /// Partition scheme.
    #[arg(long, default_value = "binary")]
    partition: String,
    /// Number of rounds.
    #[arg(short = 'T', long = "rounds", value_parser = clap::value_parser!(u64).range(1..))]
    rounds: u64,
    /// Number of seeds; runs seeds 0..N-1.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    seeds: u64,
    /// Noise scale (standard deviation, or half-width for uniform noise).
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, value_enum, default_value_t = NoiseKind::Gaussian)]
    noise: NoiseKind,
    /// Hyperparameter override `key=value`; repeatable.
    #[arg(long = "param", value_parser = parse_key_value)]
    params: Vec<(String, f64)>,
    /// Aggregate regret CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Raw per-round CSV of every seed.
    #[arg(long)]
    raw: Option<PathBuf>,
    /// Partition dump of the first seed's final tree.
    #[arg(long)]
    dump_tree: Option<PathBuf>,
    /// Worker threads for seed-parallel execution.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: u64,
}

#[derive(Debug, Args)]
struct DumpArgs {
    #[arg(long)]
    objective: String,
    /// Points per dimension.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    grid: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_key_value(s: &str) -> std::result::Result<(String, f64), String> {
    let (key, value) = s
        .split_once('=')
        .ok_or_else(|| format!("`{s}` is not of the form key=value"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(format!("`{s}` has an empty key"));
    }
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| format!("`{value}` in `{s}` is not a number"))?;
    if !value.is_finite() {
        return Err(format!("`{s}` has a non-finite value"));
    }
    Ok((key.to_string(), value))
}

/// Fully resolved `run` invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub out: Option<PathBuf>,
    pub raw: Option<PathBuf>,
    pub dump_tree: Option<PathBuf>,
    pub jobs: usize,
}

#[derive(Debug, Clone)]
pub enum Invocation {
    Run(RunConfig),
    List,
    DumpObjective {
        objective: String,
        grid: u64,
        out: Option<PathBuf>,
    },
}

/// Message plus exit status for a rejected command line (`--help` exits 0).
#[derive(Debug, Clone)]
pub struct UsageError {
    pub message: String,
    pub code: i32,
}

impl UsageError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: EXIT_USAGE,
        }
    }
}

/// Parses and validates a command line against the registries. No side effects.
pub fn parse_args<I, T>(argv: I) -> std::result::Result<Invocation, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| UsageError {
        message: e.render().to_string(),
        code: e.exit_code(),
    })?;
    match cli.command {
        Command::List => Ok(Invocation::List),
        Command::DumpObjective(args) => {
            objective_from_name(&args.objective).map_err(|e| UsageError::usage(e.to_string()))?;
            Ok(Invocation::DumpObjective {
                objective: args.objective,
                grid: args.grid,
                out: args.out,
            })
        }
        Command::Run(args) => resolve_run(args).map(Invocation::Run),
    }
}

fn resolve_run(args: RunArgs) -> std::result::Result<RunConfig, UsageError> {
    let usage = |e: crate::Error| UsageError::usage(e.to_string());
    parameter_keys(&args.algo).map_err(usage)?;
    objective_from_name(&args.objective).map_err(usage)?;
    let partition = PartitionKind::from_name(&args.partition).map_err(usage)?;
    let mut overrides = BTreeMap::new();
    for (k, v) in args.params {
        overrides.insert(k, v);
    }
    check_overrides(&args.algo, &overrides).map_err(usage)?;
    if !(args.sigma.is_finite() && args.sigma >= 0.0) {
        return Err(UsageError::usage(format!(
            "--sigma must be a non-negative number, got {}",
            args.sigma
        )));
    }
    let noise = match args.noise {
        NoiseKind::Gaussian => Noise::Gaussian { sigma: args.sigma },
        NoiseKind::Uniform => Noise::Uniform {
            half_width: args.sigma,
        },
    };
    Ok(RunConfig {
        experiment: ExperimentConfig {
            algorithm: args.algo,
            overrides,
            objective: args.objective,
            partition,
            rounds: args.rounds,
            noise,
        },
        seeds: (0..args.seeds).collect(),
        out: args.out,
        raw: args.raw,
        dump_tree: args.dump_tree,
        jobs: args.jobs as usize,
    })
}

/// Text printed by `list`.
pub fn registry_listing() -> String {
    let mut out = String::from("algorithms:\n");
    for name in ALGORITHM_NAMES {
        let keys = parameter_keys(name).expect("registered");
        let _ = writeln!(out, "  {name:<10} params: {}", keys.join(", "));
    }
    out.push_str("objectives:\n");
    for name in OBJECTIVE_NAMES {
        let _ = writeln!(out, "  {name}");
    }
    out.push_str("partitions:\n");
    for name in PartitionKind::NAMES {
        let _ = writeln!(out, "  {name}");
    }
    out
}

/// Grid evaluations `point_0,...,point_{d-1},value` over the objective's domain.
pub fn objective_grid_csv(objective: &str, grid: u64) -> Result<String> {
    let obj = objective_from_name(objective)?;
    let domain = obj.domain();
    let axes: Vec<Vec<f64>> = domain
        .intervals()
        .iter()
        .map(|iv| {
            (0..grid)
                .map(|k| {
                    if k + 1 == grid {
                        iv.high
                    } else {
                        iv.low + iv.width() * k as f64 / (grid - 1) as f64
                    }
                })
                .collect()
        })
        .collect();
    let dim = axes.len();
    let mut out = String::new();
    for d in 0..dim {
        let _ = write!(out, "point_{d},");
    }
    out.push_str("value\n");
    let mut idx = vec![0usize; dim];
    let mut x = vec![0.0; dim];
    loop {
        for d in 0..dim {
            x[d] = axes[d][idx[d]];
            let _ = write!(out, "{},", x[d]);
        }
        let _ = writeln!(out, "{}", obj.f(&x)?);
        // odometer over the grid, last dimension fastest
        let mut d = dim;
        loop {
            if d == 0 {
                return Ok(out);
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < grid as usize {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Summary of a completed `run`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub final_mean_cumulative: f64,
    pub final_mean_simple: f64,
    pub aggregate_csv: String,
}

pub fn execute_run(cfg: &RunConfig) -> Result<RunSummary> {
    let trajectories = bench::run_seeds(&cfg.experiment, &cfg.seeds, cfg.jobs)?;
    let regrets: Vec<_> = trajectories
        .iter()
        .map(|tr| cumulative_regret(tr, tr.fmax))
        .collect();
    let agg = aggregate(&regrets)?;
    let csv = bench::aggregate_csv(&agg);
    if let Some(path) = &cfg.out {
        bench::write_atomic(path, &csv)?;
    }
    if let Some(path) = &cfg.raw {
        bench::write_atomic(path, &bench::trajectories_csv(&trajectories))?;
    }
    if let Some(path) = &cfg.dump_tree {
        let first = bench::run(&cfg.experiment, cfg.seeds[0])?;
        bench::write_atomic(path, &first.algorithm.dump_tree())?;
    }
    Ok(RunSummary {
        final_mean_cumulative: *agg.mean_cumulative.last().expect("T >= 1"),
        final_mean_simple: *agg.mean_simple.last().expect("T >= 1"),
        aggregate_csv: csv,
    })
}

/// Executes a parsed invocation, writing human-readable output to `stdout`.
pub fn main_with(invocation: &Invocation, stdout: &mut dyn std::io::Write) -> Result<()> {
    let io = |e| crate::Error::io("<stdout>", e);
    match invocation {
        Invocation::List => stdout.write_all(registry_listing().as_bytes()).map_err(io),
        Invocation::DumpObjective {
            objective,
            grid,
            out,
        } => {
            let csv = objective_grid_csv(objective, *grid)?;
            match out {
                Some(path) => bench::write_atomic(path, &csv),
                None => stdout.write_all(csv.as_bytes()).map_err(io),
            }
        }
        Invocation::Run(cfg) => {
            let summary = execute_run(cfg)?;
            let e = &cfg.experiment;
            writeln!(
                stdout,
                "{} on {} ({} partition), T = {}, {} seed(s)",
                e.algorithm,
                e.objective,
                e.partition.name(),
                e.rounds,
                cfg.seeds.len()
            )
            .and_then(|_| {
                writeln!(
                    stdout,
                    "mean cumulative regret R_T = {}",
                    summary.final_mean_cumulative
                )
            })
            .and_then(|_| {
                writeln!(
                    stdout,
                    "mean simple regret s_T = {}",
                    summary.final_mean_simple
                )
            })
            .map_err(io)
        }
    }
}

/// Entry point used by the binary; returns the process exit status.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let invocation = match parse_args(argv) {
        Ok(inv) => inv,
        Err(e) => {
            if e.code == EXIT_OK {
                print!("{}", e.message);
            } else {
                eprintln!("{}", e.message.trim_end());
            }
            return e.code;
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match main_with(&invocation, &mut lock) {
        Ok(()) => {
            let _ = lock.flush();
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}
