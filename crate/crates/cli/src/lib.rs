//! Experiment runner for the discrete Morrey extremal library.
//!
//! Subcommands `extremal`, `verify`, `sweep`, `perron` and `barrier` read a
//! flat `key=value` configuration, apply `--dotted.key=value` overrides and
//! write CSV/JSON artifacts into the output directory. Exit codes: 0 on
//! success, 1 for configuration errors and failed checks, 2 when a solver does
//! not converge.

pub mod commands;
pub mod config;
pub mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::CliError;
use config::{canonical_key, number_list, RunConfig, SweepAxis};

#[derive(Parser, Debug)]
#[command(name = "morrey", about = "Discrete fractional Morrey extremals and their properties")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat key=value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for the extremal and write extremal.csv/json.
    Extremal,
    /// Run the property suite and write verify_report.json.
    Verify {
        /// Check an existing extremal CSV (with its JSON next to it) instead of solving.
        #[arg(long)]
        extremal: Option<PathBuf>,
    },
    /// One extremal per value of a parameter; writes sweep.csv.
    Sweep {
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: Option<String>,
    },
    /// Slit-domain Dirichlet experiment (two dimensions).
    Perron,
    /// Operator residual of the sampled barrier.
    Barrier,
}

/// Splits `--dotted.key=value` and `--dotted.key value` overrides from the
/// arguments clap handles.
fn split_overrides(args: Vec<String>) -> Result<(Vec<String>, Vec<(String, String)>), CliError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(flag) = arg.strip_prefix("--") else {
            rest.push(arg);
            continue;
        };
        let (key, inline) = match flag.split_once('=') {
            Some((k, v)) => (k.to_string(), Some(v.to_string())),
            None => (flag.to_string(), None),
        };
        if canonical_key(&key).is_none() {
            rest.push(arg);
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => it.next().ok_or_else(|| CliError::Config(format!("--{key} needs a value")))?,
        };
        overrides.push((key, value));
    }
    Ok((rest, overrides))
}

fn init_logging() {
    let level = match std::env::var("MORREY_LOG").as_deref() {
        Ok("quiet") => "off",
        Ok("debug") => "debug",
        Ok("info") => "info",
        _ => "warn",
    };
    let _ = env_logger::Builder::new().parse_filters(level).format_timestamp(None).try_init();
}

fn execute(args: Vec<String>) -> Result<(), CliError> {
    let (rest, overrides) = split_overrides(args)?;
    let cli = match Cli::try_parse_from(rest) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Config(e.to_string())),
    };
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    for (key, value) in &overrides {
        cfg.set(key, value)?;
    }
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    if let Some(seed) = cli.seed {
        cfg.rng_seed = seed;
    }
    match cli.command {
        Command::Extremal => commands::cmd_extremal(&cfg),
        Command::Verify { extremal } => cmd_verify(&cfg, extremal),
        Command::Sweep { axis, values } => {
            if let Some(axis) = axis {
                cfg.sweep_axis = Some(SweepAxis::parse(&axis)?);
            }
            if let Some(values) = values {
                cfg.sweep_values = number_list("--values", &values)?;
            }
            commands::cmd_sweep(&cfg)
        }
        Command::Perron => commands::cmd_perron(&cfg),
        Command::Barrier => commands::cmd_barrier(&cfg),
    }
}

fn cmd_verify(cfg: &RunConfig, extremal: Option<PathBuf>) -> Result<(), CliError> {
    let (cfg, res, w) = match extremal {
        Some(path) => {
            let (res, w) = commands::load_extremal(&path)?;
            let run = commands::adopt_grid(cfg, &res.u);
            run.validate()?;
            (run, res, w)
        }
        None => {
            let (res, w) = commands::solve(cfg)?;
            (cfg.clone(), res, w)
        }
    };
    let report = verify::run_checks(&cfg, &res, &w);
    commands::prepare_output(&cfg.output_dir)?;
    morrey_core::io::write_json(&report, &cfg.output_dir.join("verify_report.json"))?;
    if report.all_pass {
        Ok(())
    } else {
        Err(CliError::ChecksFailed(report.failed()))
    }
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run(args: Vec<String>) -> i32 {
    init_logging();
    match execute(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("morrey: {e}");
            e.exit_code()
        }
    }
}
