//! The full property suite behind `morrey verify`.
//!
//! Every check runs even when an earlier one fails. The report maps check
//! names to objects with a `pass` flag and the measured quantities; it holds
//! no timings, so equal configurations give byte-identical reports.

use std::collections::BTreeMap;

use log::info;
use morrey_core::extremal::{
    verify_pointwise_bounds, verify_stability, verify_symmetries, verify_uniqueness, ExtremalOptions, ExtremalResult,
    InitialGuess, StabilityOptions,
};
use morrey_core::operator::{annulus_nodes, euler_lagrange_residual, verify_barrier_harmonicity};
use morrey_core::perron::{run_decay_experiment, run_slit_experiment, verify_half_space_sign};
use morrey_core::sampling::{sample, stream, Family, ALL_FAMILIES};
use morrey_core::seminorm::{clarkson_inequality, verify_morrey_bound, KernelWeights};
use morrey_core::solver::Stopping;
use morrey_core::{FracParams, Lattice};
use rand::RngExt;
use serde::Serialize;
use serde_json::{json, Value};

use crate::commands::{extremal_options, CliError};
use crate::config::RunConfig;

pub const CHECKS: [&str; 12] = [
    "morrey_bound",
    "clarkson",
    "uniqueness",
    "rotational_symmetry",
    "anti_symmetry",
    "pointwise_bounds",
    "stability",
    "euler_lagrange",
    "barrier",
    "slit_decay",
    "limit_at_infinity",
    "half_space_sign",
];

// stream ids of the seeded generator, one per randomized check
const MORREY_STREAM: u64 = 1;
const CLARKSON_STREAM: u64 = 2;
const UNIQUENESS_STREAM: u64 = 3;
const STABILITY_STREAM: u64 = 4;

#[derive(Serialize)]
pub struct VerifyReport {
    pub all_pass: bool,
    pub checks: BTreeMap<String, Value>,
    pub config: RunConfig,
}

fn outcome(pass: bool, detail: Value) -> Value {
    let mut v = detail;
    v["pass"] = Value::Bool(pass);
    v
}

fn failure(e: impl std::fmt::Display) -> Value {
    json!({ "pass": false, "error": e.to_string() })
}

fn not_applicable(reason: &str) -> Value {
    json!({ "pass": true, "applicable": false, "reason": reason })
}

/// Threshold for residual-type checks: ten times the tolerance, converted
/// from gradient units to operator units.
fn residual_threshold(cfg: &RunConfig, lattice: &Lattice) -> f64 {
    let scale = 2.0 * lattice.params().p() * lattice.cell_volume();
    10.0 * cfg.tol / scale.min(1.0)
}

fn morrey_bound(cfg: &RunConfig, res: &ExtremalResult, w: &KernelWeights) -> Result<Value, CliError> {
    let lattice = w.lattice();
    let mut rng = stream(cfg.rng_seed, MORREY_STREAM);
    let mut worst = 0.0f64;
    let mut tested = 0;
    for k in 0..cfg.samples {
        let u = sample(lattice, ALL_FAMILIES[k % ALL_FAMILIES.len()], Some(&res.u), &mut rng)?;
        if u.is_constant() {
            continue;
        }
        worst = worst.max(verify_morrey_bound(&u, w)?.ratio / res.c_star_hat);
        tested += 1;
    }
    let pass = worst <= 1.02;
    Ok(outcome(pass, json!({ "c_star_hat": res.c_star_hat, "worst_ratio_over_c_star": worst, "samples": tested, "limit": 1.02 })))
}

fn clarkson(cfg: &RunConfig, w: &KernelWeights) -> Result<Value, CliError> {
    let lattice = w.lattice();
    let mut rng = stream(cfg.rng_seed, CLARKSON_STREAM);
    let families = [Family::Noise, Family::Bumps, Family::Hat];
    let mut min_slack = f64::INFINITY;
    let mut large = false;
    for k in 0..cfg.samples {
        let u = sample(lattice, families[k % 3], None, &mut rng)?;
        let v = sample(lattice, families[(k + 1) % 3], None, &mut rng)?;
        let r = clarkson_inequality(&u, &v, w)?;
        min_slack = min_slack.min(r.relative_slack);
        large = r.large_exponent_branch;
    }
    Ok(outcome(min_slack >= -1e-10, json!({ "min_relative_slack": min_slack, "pairs": cfg.samples, "large_exponent_branch": large })))
}

fn uniqueness(cfg: &RunConfig, res: &ExtremalResult, w: &KernelWeights) -> Result<Value, CliError> {
    let mut rng = stream(cfg.rng_seed, UNIQUENESS_STREAM);
    let (lo, hi) = (res.pins.a.min(res.pins.b), res.pins.a.max(res.pins.b));
    let noise: Vec<f64> = (0..w.lattice().len()).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect();
    let seeds = [InitialGuess::Midpoint, InitialGuess::Custom(noise)];
    let r = verify_uniqueness(w, res.pins, &seeds, &extremal_options(cfg)?)?;
    Ok(outcome(r.pass, serde_json::to_value(&r).expect("plain data")))
}

fn symmetry_checks(res: &ExtremalResult, threshold: f64) -> (Value, Value) {
    match verify_symmetries(res, threshold) {
        Ok(r) => {
            let rotational = match r.axis_defect {
                Some(d) => outcome(d <= threshold, json!({ "applicable": true, "axis_defect": d, "threshold": threshold })),
                None => not_applicable("one dimension: the only symmetry fixing the pin axis is the identity"),
            };
            let anti = outcome(
                r.anti_symmetry_defect <= threshold && r.hyperplane_max <= threshold,
                json!({ "anti_symmetry_defect": r.anti_symmetry_defect, "hyperplane_max": r.hyperplane_max, "threshold": threshold }),
            );
            (rotational, anti)
        }
        Err(morrey_core::Error::Precondition(_)) => {
            let why = "pins are not at ±e_n";
            (not_applicable(why), not_applicable(why))
        }
        Err(e) => (failure(&e), failure(&e)),
    }
}

fn stability(cfg: &RunConfig, res: &ExtremalResult, w: &KernelWeights) -> Result<Value, CliError> {
    let lattice = w.lattice();
    let mut rng = stream(cfg.rng_seed, STABILITY_STREAM);
    let families = [Family::Noise, Family::Bumps, Family::Hat, Family::Perturbed, Family::Affine];
    let opts = StabilityOptions { extremal: ExtremalOptions { free_far_field: true, ..extremal_options(cfg)? }, allow_resolve: true };
    let count = (cfg.samples / 5).max(1);
    let mut worst = f64::INFINITY;
    let mut large = false;
    for k in 0..count {
        let v = sample(lattice, families[k % families.len()], Some(&res.u), &mut rng)?;
        if v.is_constant() {
            continue;
        }
        let r = verify_stability(res, &v, w, &opts)?;
        worst = worst.min(r.residual);
        large = r.large_exponent_branch;
    }
    Ok(outcome(worst >= -1e-8, json!({ "min_residual": worst, "samples": count, "large_exponent_branch": large })))
}

fn euler_lagrange(cfg: &RunConfig, res: &ExtremalResult, w: &KernelWeights) -> Result<Value, CliError> {
    let r = euler_lagrange_residual(res, w)?;
    let threshold = residual_threshold(cfg, w.lattice());
    let imbalance = r.pin_mass_imbalance.unwrap_or(f64::INFINITY);
    let pass = r.max_abs <= threshold && imbalance <= 1e-6;
    Ok(outcome(
        pass,
        json!({
            "max_abs": r.max_abs,
            "threshold": threshold,
            "pin_masses": r.pin_masses,
            "pin_mass_imbalance": imbalance,
            "fitted_factor": r.fitted_factor,
        }),
    ))
}

/// Residual on the annulus at `(L, h)` and at `(2L, h/2)`; it must drop by 1.5.
fn barrier(cfg: &RunConfig, params: FracParams, lattice: &Lattice) -> Result<Value, CliError> {
    let residual = |l: f64, h: f64| -> Result<f64, CliError> {
        let lat = Lattice::build(params, l, h)?;
        let w = KernelWeights::build(&lat);
        Ok(verify_barrier_harmonicity(&w, &annulus_nodes(&lat, cfg.barrier_r_min, cfg.barrier_r_max))?.max_abs)
    };
    let coarse = residual(lattice.half_extent(), lattice.spacing())?;
    let fine = residual(2.0 * lattice.half_extent(), 0.5 * lattice.spacing())?;
    let ratio = coarse / fine;
    Ok(outcome(ratio >= 1.5, json!({ "coarse_residual": coarse, "fine_residual": fine, "reduction": ratio, "limit": 1.5 })))
}

fn slit_decay(cfg: &RunConfig) -> Result<Value, CliError> {
    let params = FracParams::new(2, cfg.slit_s, cfg.slit_p)?;
    let opts = morrey_core::solver::SolverOptions { stopping: Stopping::Operator, ..cfg.solver()? };
    let r = run_slit_experiment(params, 1.0, cfg.slit_h, &opts)?;
    let barrier_pass = r.barrier.as_ref().is_some_and(|b| b.pass);
    let pass = r.rings_monotone && barrier_pass;
    Ok(outcome(
        pass,
        json!({
            "rings": r.rings,
            "rings_monotone": r.rings_monotone,
            "negation_defect": r.negation_defect,
            "ray_monotonicity_violation": r.ray_monotonicity_violation,
            "barrier": r.barrier,
            "spacing": r.spacing,
        }),
    ))
}

fn limit_at_infinity(res: &ExtremalResult) -> Result<Value, CliError> {
    let l = res.u.lattice().half_extent();
    match run_decay_experiment(res, &[0.25 * l, 0.5 * l, l]) {
        Ok(r) => Ok(outcome(r.strictly_decreasing, serde_json::to_value(&r).expect("plain data"))),
        Err(morrey_core::Error::Precondition(_)) => Ok(not_applicable("pins are not at ±e_n")),
        Err(e) => Err(e.into()),
    }
}

fn half_space_sign(res: &ExtremalResult) -> Result<Value, CliError> {
    match verify_half_space_sign(res, 1e-6) {
        Ok(r) => Ok(outcome(r.pass, serde_json::to_value(&r).expect("plain data"))),
        Err(morrey_core::Error::Precondition(_)) => Ok(not_applicable("needs pins at ±e_n with a > b")),
        Err(e) => Err(e.into()),
    }
}

/// Runs every check on the extremal `res`. Checks that error out are
/// reported as failed with the error message.
pub fn run_checks(cfg: &RunConfig, res: &ExtremalResult, w: &KernelWeights) -> VerifyReport {
    let lattice = w.lattice();
    let threshold = 10.0 * cfg.tol;
    let mut checks = BTreeMap::new();
    let mut record = |name: &str, value: Result<Value, CliError>| {
        let v = value.unwrap_or_else(failure);
        info!("{name}: {}", if v["pass"] == Value::Bool(true) { "pass" } else { "FAIL" });
        checks.insert(name.to_string(), v);
    };
    record("morrey_bound", morrey_bound(cfg, res, w));
    record("clarkson", clarkson(cfg, w));
    record("uniqueness", uniqueness(cfg, res, w));
    let (rotational, anti) = symmetry_checks(res, threshold);
    record("rotational_symmetry", Ok(rotational));
    record("anti_symmetry", Ok(anti));
    record(
        "pointwise_bounds",
        verify_pointwise_bounds(res, threshold).map(|r| outcome(r.pass, serde_json::to_value(&r).expect("plain data"))).map_err(Into::into),
    );
    record("stability", stability(cfg, res, w));
    record("euler_lagrange", euler_lagrange(cfg, res, w));
    record("barrier", barrier(cfg, *lattice.params(), lattice));
    record("slit_decay", slit_decay(cfg));
    record("limit_at_infinity", limit_at_infinity(res));
    record("half_space_sign", half_space_sign(res));
    let all_pass = checks.values().all(|v| v["pass"] == Value::Bool(true));
    VerifyReport { all_pass, checks, config: cfg.clone() }
}

impl VerifyReport {
    pub fn failed(&self) -> Vec<String> {
        self.checks.iter().filter(|(_, v)| v["pass"] != Value::Bool(true)).map(|(k, _)| k.clone()).collect()
    }
}
