//! Subcommand bodies. Each returns `Ok(())` on success; the caller maps
//! errors onto exit codes.

use std::fmt;
use std::fs;
use std::path::Path;

use log::{info, warn};
use morrey_core::extremal::{solve_extremal_with, ExtremalOptions, ExtremalResult};
use morrey_core::io;
use morrey_core::operator::{annulus_nodes, euler_lagrange_residual, verify_barrier_harmonicity};
use morrey_core::perron::{run_slit_experiment, slit_data};
use morrey_core::seminorm::KernelWeights;
use morrey_core::solver::Stopping;
use morrey_core::{FracParams, GridFunction};
use serde::Serialize;

use crate::config::{ConfigError, RunConfig, SweepAxis};

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or input; exit code 1.
    Config(String),
    /// A solver ran out of iterations; exit code 2.
    NonConvergence(String),
    /// Some verification checks failed; exit code 1.
    ChecksFailed(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::ChecksFailed(_) => 1,
            CliError::NonConvergence(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::NonConvergence(m) => write!(f, "{m}"),
            CliError::ChecksFailed(names) => write!(f, "failed checks: {}", names.join(", ")),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<morrey_core::Error> for CliError {
    fn from(e: morrey_core::Error) -> Self {
        match e {
            morrey_core::Error::NonConvergence { .. } => CliError::NonConvergence(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub fn extremal_options(cfg: &RunConfig) -> Result<ExtremalOptions, CliError> {
    Ok(ExtremalOptions { solver: cfg.solver()?, ..ExtremalOptions::default() })
}

/// Solves the configured extremal problem.
pub fn solve(cfg: &RunConfig) -> Result<(ExtremalResult, KernelWeights), CliError> {
    cfg.validate()?;
    let lattice = cfg.lattice()?;
    let w = KernelWeights::build(&lattice);
    let pins = cfg.pins(&lattice)?;
    let res = solve_extremal_with(&w, pins, &extremal_options(cfg)?)?;
    info!("extremal: {} iterations, C* estimate {:.6}", res.iterations, res.c_star_hat);
    Ok((res, w))
}

pub fn prepare_output(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))
}

pub fn cmd_extremal(cfg: &RunConfig) -> Result<(), CliError> {
    let (res, w) = solve(cfg)?;
    let out = &cfg.output_dir;
    prepare_output(out)?;
    io::write_extremal(&res, out, "extremal")?;
    let residual = euler_lagrange_residual(&res, &w)?;
    io::write_residual(&residual, w.lattice(), &out.join("euler_lagrange.csv"), &out.join("euler_lagrange.json"))?;
    Ok(())
}

#[derive(Serialize)]
struct SweepStatus {
    value: f64,
    ok: bool,
    error: Option<String>,
}

fn with_axis(cfg: &RunConfig, axis: SweepAxis, value: f64) -> RunConfig {
    let mut run = cfg.clone();
    match axis {
        SweepAxis::S => run.s = value,
        SweepAxis::P => run.p = value,
        SweepAxis::H => run.h = value,
        SweepAxis::L => run.half_extent = value,
    }
    run
}

/// One extremal per value; failed values get `NaN` rows and the run goes on.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let axis = cfg.sweep_axis.ok_or_else(|| CliError::Config("sweep needs an axis (--axis or sweep.axis)".into()))?;
    if cfg.sweep_values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    let out = &cfg.output_dir;
    prepare_output(out)?;
    let mut csv = String::from("value,c_star_hat,gagliardo,holder,max_el_residual\n");
    let mut statuses = Vec::new();
    let mut worst: Option<CliError> = None;
    for &value in &cfg.sweep_values {
        let run = with_axis(cfg, axis, value);
        let row = solve(&run).and_then(|(res, w)| {
            let el = euler_lagrange_residual(&res, &w)?;
            Ok([res.c_star_hat, res.gagliardo, res.holder, el.max_abs])
        });
        match row {
            Ok(r) => {
                csv.push_str(&format!("{value},{},{},{},{}\n", r[0], r[1], r[2], r[3]));
                statuses.push(SweepStatus { value, ok: true, error: None });
            }
            Err(e) => {
                warn!("sweep value {value}: {e}");
                csv.push_str(&format!("{value},NaN,NaN,NaN,NaN\n"));
                statuses.push(SweepStatus { value, ok: false, error: Some(e.to_string()) });
                // non-convergence outranks configuration errors in the exit code
                if !matches!(worst, Some(CliError::NonConvergence(_))) {
                    worst = Some(e);
                }
            }
        }
    }
    fs::write(out.join("sweep.csv"), csv).map_err(morrey_core::Error::from)?;
    io::write_json(&statuses, &out.join("sweep.json"))?;
    match worst {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// The slit experiment with the configured exponents; needs `n = 2`.
pub fn cmd_perron(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.validate()?;
    if cfg.n != 2 {
        return Err(CliError::Config("perron runs the planar slit experiment and needs params.n=2".into()));
    }
    let params = cfg.params()?;
    let opts = morrey_core::solver::SolverOptions { stopping: Stopping::Operator, ..cfg.solver()? };
    let report = run_slit_experiment(params, cfg.half_extent, cfg.h, &opts)?;
    let data = slit_data(report.solution.lattice())?;
    let out = &cfg.output_dir;
    prepare_output(out)?;
    io::write_complement(&data, Some(&report.solution), &out.join("perron.csv"), &out.join("perron_grid.json"))?;
    io::write_json(&report, &out.join("perron.json"))?;
    if report.barrier.as_ref().is_some_and(|b| !b.pass) {
        return Err(CliError::ChecksFailed(vec!["barrier_bound".into()]));
    }
    Ok(())
}

/// Operator residual of the sampled barrier on the configured annulus.
pub fn cmd_barrier(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.validate()?;
    let lattice = cfg.lattice()?;
    let w = KernelWeights::build(&lattice);
    let nodes = annulus_nodes(&lattice, cfg.barrier_r_min, cfg.barrier_r_max);
    if nodes.is_empty() {
        return Err(CliError::Config("no lattice node in the barrier annulus".into()));
    }
    let residual = verify_barrier_harmonicity(&w, &nodes)?;
    let out = &cfg.output_dir;
    prepare_output(out)?;
    io::write_residual(&residual, &lattice, &out.join("barrier.csv"), &out.join("barrier.json"))?;
    let g = morrey_core::operator::sampled_barrier(&lattice)?;
    io::write_grid_function(&g, &out.join("barrier_values.csv"), &out.join("barrier_values.json"))?;
    Ok(())
}

/// Reads `<stem>.csv` and the `<stem>.json` summary next to it.
pub fn load_extremal(csv: &Path) -> Result<(ExtremalResult, KernelWeights), CliError> {
    let json = csv.with_extension("json");
    let summary = fs::read_to_string(&json).map_err(|e| CliError::Config(format!("cannot read {}: {e}", json.display())))?;
    let meta: io::ExtremalSummary = serde_json::from_str(&summary).map_err(|e| CliError::Config(format!("{}: {e}", json.display())))?;
    let lattice = meta.grid.lattice()?;
    let w = KernelWeights::build(&lattice);
    let res = io::read_extremal(csv, &json, Some(&w))?;
    Ok((res, w))
}

/// Grid parameters of a loaded extremal override the configured ones.
pub fn adopt_grid(cfg: &RunConfig, u: &GridFunction) -> RunConfig {
    let lattice = u.lattice();
    let params: &FracParams = lattice.params();
    let mut run = cfg.clone();
    run.n = params.n();
    run.s = params.s();
    run.p = params.p();
    run.half_extent = lattice.half_extent();
    run.h = lattice.spacing();
    run
}
