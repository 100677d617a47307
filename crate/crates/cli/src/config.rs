//! Flat `key=value` run configuration with dotted keys.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use morrey_core::extremal::PinSpec;
use morrey_core::solver::{Optimizer, SolverOptions};
use morrey_core::{FracParams, Lattice, Point};
use serde::Serialize;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<morrey_core::Error> for ConfigError {
    fn from(e: morrey_core::Error) -> Self {
        ConfigError(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    S,
    P,
    H,
    L,
}

impl SweepAxis {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        match text.trim() {
            "s" => Ok(SweepAxis::S),
            "p" => Ok(SweepAxis::P),
            "h" => Ok(SweepAxis::H),
            "L" => Ok(SweepAxis::L),
            other => Err(ConfigError(format!("unknown sweep axis '{other}', expected one of s, p, h, L"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub n: usize,
    pub s: f64,
    pub p: f64,
    #[serde(rename = "L")]
    pub half_extent: f64,
    pub h: f64,
    pub pin_a: f64,
    pub pin_b: f64,
    /// Pin coordinates; `None` means `±eₙ`.
    pub pin_x0: Option<Point>,
    pub pin_y0: Option<Point>,
    pub tol: f64,
    pub max_iter: usize,
    #[serde(serialize_with = "optimizer_name")]
    pub optimizer: Optimizer,
    pub experiment: Option<String>,
    pub rng_seed: u64,
    /// Left out of reports so that they do not depend on where they are written.
    #[serde(skip)]
    pub output_dir: PathBuf,
    pub sweep_axis: Option<SweepAxis>,
    pub sweep_values: Vec<f64>,
    /// Random functions per sampled check in `verify`.
    pub samples: usize,
    pub slit_s: f64,
    pub slit_p: f64,
    pub slit_h: f64,
    pub barrier_r_min: f64,
    pub barrier_r_max: f64,
}

fn optimizer_name<S: serde::Serializer>(o: &Optimizer, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match o {
        Optimizer::Lbfgs => "lbfgs",
        Optimizer::GradientDescent => "gradient_descent",
        Optimizer::GaussSeidel => "gauss_seidel",
        Optimizer::Jacobi => "jacobi",
    })
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 1,
            s: 0.8,
            p: 2.0,
            half_extent: 4.0,
            h: 0.25,
            pin_a: 1.0,
            pin_b: -1.0,
            pin_x0: None,
            pin_y0: None,
            tol: 1e-8,
            max_iter: 100_000,
            optimizer: Optimizer::Lbfgs,
            experiment: None,
            rng_seed: 0,
            output_dir: PathBuf::from("out"),
            sweep_axis: None,
            sweep_values: Vec::new(),
            samples: 100,
            slit_s: 0.9,
            slit_p: 4.0,
            slit_h: 0.0625,
            barrier_r_min: 1.0,
            barrier_r_max: 2.0,
        }
    }
}

/// Canonical dotted key for `key`, accepting a few bare shorthands.
pub fn canonical_key(key: &str) -> Option<&'static str> {
    Some(match key {
        "params.n" | "n" => "params.n",
        "params.s" | "s" => "params.s",
        "params.p" | "p" => "params.p",
        "geometry.L" | "L" => "geometry.L",
        "geometry.h" | "h" => "geometry.h",
        "pins.a" => "pins.a",
        "pins.b" => "pins.b",
        "pins.x0" => "pins.x0",
        "pins.y0" => "pins.y0",
        "solver.tol" | "tol" => "solver.tol",
        "solver.max_iter" | "max_iter" => "solver.max_iter",
        "solver.optimizer" => "solver.optimizer",
        "experiment" => "experiment",
        "rng_seed" => "rng_seed",
        "output_dir" => "output_dir",
        "sweep.axis" => "sweep.axis",
        "sweep.values" => "sweep.values",
        "verify.samples" => "verify.samples",
        "slit.s" => "slit.s",
        "slit.p" => "slit.p",
        "slit.h" => "slit.h",
        "barrier.r_min" => "barrier.r_min",
        "barrier.r_max" => "barrier.r_max",
        _ => return None,
    })
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError(format!("{key}: cannot parse '{value}'")))
}

fn point(key: &str, value: &str) -> Result<Point, ConfigError> {
    let parts = value.split(',').map(|c| number::<f64>(key, c)).collect::<Result<Vec<_>, _>>()?;
    match parts[..] {
        [x] => Ok([x, 0.0]),
        [x, y] => Ok([x, y]),
        _ => Err(ConfigError(format!("{key}: expected one or two coordinates, got '{value}'"))),
    }
}

/// Comma-separated list; the empty string is the empty list.
pub fn number_list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| number(key, v)).collect()
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = canonical_key(key.trim()).ok_or_else(|| ConfigError(format!("unknown config key '{key}'")))?;
        match key {
            "params.n" => self.n = number(key, value)?,
            "params.s" => self.s = number(key, value)?,
            "params.p" => self.p = number(key, value)?,
            "geometry.L" => self.half_extent = number(key, value)?,
            "geometry.h" => self.h = number(key, value)?,
            "pins.a" => self.pin_a = number(key, value)?,
            "pins.b" => self.pin_b = number(key, value)?,
            "pins.x0" => self.pin_x0 = Some(point(key, value)?),
            "pins.y0" => self.pin_y0 = Some(point(key, value)?),
            "solver.tol" => self.tol = number(key, value)?,
            "solver.max_iter" => self.max_iter = number(key, value)?,
            "solver.optimizer" => self.optimizer = value.trim().parse().map_err(ConfigError)?,
            "experiment" => self.experiment = Some(value.trim().to_string()),
            "rng_seed" => self.rng_seed = number(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value.trim()),
            "sweep.axis" => self.sweep_axis = Some(SweepAxis::parse(value)?),
            "sweep.values" => self.sweep_values = number_list(key, value)?,
            "verify.samples" => self.samples = number(key, value)?,
            "slit.s" => self.slit_s = number(key, value)?,
            "slit.p" => self.slit_p = number(key, value)?,
            "slit.h" => self.slit_h = number(key, value)?,
            "barrier.r_min" => self.barrier_r_min = number(key, value)?,
            "barrier.r_max" => self.barrier_r_max = number(key, value)?,
            _ => unreachable!("canonical_key covers every key"),
        }
        Ok(())
    }

    /// Applies the `key=value` lines of `text`. Blank lines and `#` comments
    /// are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected key=value, got '{line}'", k + 1)))?;
            self.set(key, value).map_err(|e| ConfigError(format!("line {}: {e}", k + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn params(&self) -> Result<FracParams, ConfigError> {
        Ok(FracParams::new(self.n, self.s, self.p)?)
    }

    pub fn lattice(&self) -> Result<Arc<Lattice>, ConfigError> {
        Ok(Lattice::build(self.params()?, self.half_extent, self.h)?)
    }

    pub fn pins(&self, lattice: &Lattice) -> Result<PinSpec, ConfigError> {
        let (cx, cy) = lattice.canonical_pins();
        let x0 = match self.pin_x0 {
            Some(x) => lattice.node_at(x)?,
            None => cx,
        };
        let y0 = match self.pin_y0 {
            Some(y) => lattice.node_at(y)?,
            None => cy,
        };
        Ok(PinSpec::new(lattice, x0, y0, self.pin_a, self.pin_b)?)
    }

    pub fn solver(&self) -> Result<SolverOptions, ConfigError> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(ConfigError(format!("solver.tol = {} must be positive", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(ConfigError("solver.max_iter must be positive".into()));
        }
        Ok(SolverOptions { tol: self.tol, max_iter: self.max_iter, optimizer: self.optimizer, ..SolverOptions::default() })
    }

    /// Checks every constraint the subcommands rely on.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let lattice = self.lattice()?;
        self.pins(&lattice)?;
        self.solver()?;
        if self.samples == 0 {
            return Err(ConfigError("verify.samples must be positive".into()));
        }
        Ok(())
    }
}
