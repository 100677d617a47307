//! Discrete Morrey extremals: minimizers of the p-energy with two pinned node
//! values, the sharp-constant estimate they produce, and the uniqueness,
//! symmetry, pointwise-bound and stability checks built on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, Lattice};
use crate::seminorm::{gagliardo_energy, gagliardo_seminorm, holder_seminorm, KernelWeights};
use crate::solver::{minimize, Problem, SolverOptions};

/// Two pinned node values `u(x₀) = a`, `u(y₀) = b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinSpec {
    pub x0: usize,
    pub y0: usize,
    pub a: f64,
    pub b: f64,
}

impl PinSpec {
    pub fn new(lattice: &Lattice, x0: usize, y0: usize, a: f64, b: f64) -> Result<Self> {
        if x0 >= lattice.len() || y0 >= lattice.len() {
            return Err(Error::InvalidParameter("pin node out of range".into()));
        }
        if x0 == y0 {
            return Err(Error::InvalidParameter("pins must be distinct nodes".into()));
        }
        if !(a.is_finite() && b.is_finite()) || a == b {
            return Err(Error::InvalidParameter(format!("pin values {a}, {b} must be finite and distinct")));
        }
        Ok(Self { x0, y0, a, b })
    }

    /// `u(eₙ) = 1`, `u(−eₙ) = −1`.
    pub fn canonical(lattice: &Lattice) -> Self {
        let (x0, y0) = lattice.canonical_pins();
        Self { x0, y0, a: 1.0, b: -1.0 }
    }

    pub fn is_canonical_geometry(&self, lattice: &Lattice) -> bool {
        (self.x0, self.y0) == lattice.canonical_pins()
    }

    pub fn midpoint_value(&self) -> f64 {
        0.5 * (self.a + self.b)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialGuess {
    /// `(a + b)/2` away from the pins.
    Midpoint,
    /// Linear ramp along the pin axis, clamped to `[min(a,b), max(a,b)]`.
    LinearInterpolant,
    /// Node values; pins are overwritten.
    Custom(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct ExtremalOptions {
    pub solver: SolverOptions,
    pub init: InitialGuess,
    /// Optimize the far field as well instead of fixing it at `(a + b)/2`.
    pub free_far_field: bool,
}

impl Default for ExtremalOptions {
    fn default() -> Self {
        Self { solver: SolverOptions::default(), init: InitialGuess::Midpoint, free_far_field: false }
    }
}

#[derive(Clone, Debug)]
pub struct ExtremalResult {
    pub u: GridFunction,
    pub pins: PinSpec,
    pub gagliardo: f64,
    pub holder: f64,
    pub holder_argpair: (usize, usize),
    pub c_star_hat: f64,
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub free_far_field: bool,
    pub energy_history: Vec<f64>,
}

fn initial_values(lattice: &Lattice, pins: &PinSpec, init: &InitialGuess) -> Result<Vec<f64>> {
    let mut values = match init {
        InitialGuess::Midpoint => vec![pins.midpoint_value(); lattice.len()],
        InitialGuess::LinearInterpolant => {
            let (px, py) = (lattice.point(pins.x0), lattice.point(pins.y0));
            let axis = [px[0] - py[0], px[1] - py[1]];
            let len2 = axis[0] * axis[0] + axis[1] * axis[1];
            lattice
                .points()
                .map(|x| {
                    let t = (((x[0] - py[0]) * axis[0] + (x[1] - py[1]) * axis[1]) / len2).clamp(0.0, 1.0);
                    pins.b + t * (pins.a - pins.b)
                })
                .collect()
        }
        InitialGuess::Custom(v) => {
            if v.len() != lattice.len() || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter("custom initial guess has the wrong length or non-finite entries".into()));
            }
            v.clone()
        }
    };
    values[pins.x0] = pins.a;
    values[pins.y0] = pins.b;
    Ok(values)
}

/// Minimizes the energy with the pins fixed and far field `(a + b)/2`.
pub fn solve_extremal(w: &KernelWeights, pins: PinSpec, tol: f64, max_iter: usize) -> Result<ExtremalResult> {
    let opts = ExtremalOptions {
        solver: SolverOptions { tol, max_iter, ..SolverOptions::default() },
        ..ExtremalOptions::default()
    };
    solve_extremal_with(w, pins, &opts)
}

pub fn solve_extremal_with(w: &KernelWeights, pins: PinSpec, opts: &ExtremalOptions) -> Result<ExtremalResult> {
    let lattice = w.lattice();
    PinSpec::new(lattice, pins.x0, pins.y0, pins.a, pins.b)?;
    if !(opts.solver.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {} must be positive", opts.solver.tol)));
    }
    let values = initial_values(lattice, &pins, &opts.init)?;
    let mut fixed = vec![false; lattice.len()];
    fixed[pins.x0] = true;
    fixed[pins.y0] = true;
    let problem = Problem { weights: w, fixed, free_far_field: opts.free_far_field };
    let out = minimize(&problem, values, pins.midpoint_value(), &opts.solver);
    if !out.converged {
        return Err(Error::NonConvergence { iterations: out.iterations, grad_norm: out.grad_norm });
    }
    log::debug!("extremal converged in {} iterations, gradient {:e}", out.iterations, out.grad_norm);
    let u = GridFunction::new(lattice.clone(), out.values, out.far_field)?;
    let gagliardo = gagliardo_seminorm(&u, w)?;
    let hs = holder_seminorm(&u)?;
    Ok(ExtremalResult {
        u,
        pins,
        gagliardo,
        holder: hs.value,
        holder_argpair: hs.argpair,
        c_star_hat: hs.value / gagliardo,
        iterations: out.iterations,
        final_grad_norm: out.grad_norm,
        free_far_field: opts.free_far_field,
        energy_history: out.energy_history,
    })
}

/// `Ĉ* = [u]_C / [u]_W` of a converged extremal.
pub fn estimate_sharp_constant(res: &ExtremalResult) -> Result<f64> {
    if res.gagliardo == 0.0 {
        return Err(Error::Degenerate("extremal has zero Gagliardo seminorm".into()));
    }
    Ok(res.holder / res.gagliardo)
}

#[derive(Clone, Debug, Serialize)]
pub struct UniquenessReport {
    pub runs: usize,
    /// Largest max-norm distance between any two solutions.
    pub max_gap: f64,
    pub threshold: f64,
    /// `½(E(u₁) + E(u₂)) − E(½(u₁ + u₂))` for the first and last solution.
    pub convexity_gap: f64,
    pub pass: bool,
}

/// Solves from each initial guess and compares the minimizers. They must
/// agree within `10·tol`.
pub fn verify_uniqueness(
    w: &KernelWeights,
    pins: PinSpec,
    seeds: &[InitialGuess],
    opts: &ExtremalOptions,
) -> Result<UniquenessReport> {
    if seeds.len() < 2 {
        return Err(Error::Precondition("uniqueness needs at least two initial guesses".into()));
    }
    let mut solutions = Vec::with_capacity(seeds.len());
    for seed in seeds {
        let run = ExtremalOptions { init: seed.clone(), ..opts.clone() };
        solutions.push(solve_extremal_with(w, pins, &run)?.u);
    }
    let mut max_gap = 0.0f64;
    for (k, a) in solutions.iter().enumerate() {
        for b in &solutions[k + 1..] {
            max_gap = max_gap.max(a.max_abs_diff(b)?);
        }
    }
    let first = &solutions[0];
    let last = &solutions[solutions.len() - 1];
    let mid = first.combine(0.5, last, 0.5)?;
    let convexity_gap = 0.5 * (gagliardo_energy(first, w)? + gagliardo_energy(last, w)?) - gagliardo_energy(&mid, w)?;
    let threshold = 10.0 * opts.solver.tol;
    Ok(UniquenessReport { runs: seeds.len(), max_gap, threshold, convexity_gap, pass: max_gap <= threshold })
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryReport {
    /// `max |u(x) − u(Rx)|` over lattice symmetries `R` fixing the pin axis;
    /// `None` when the only such symmetry is the identity.
    pub axis_defect: Option<f64>,
    /// `max |u(x′, xₙ) + u(x′, −xₙ) − (a + b)|`.
    pub anti_symmetry_defect: f64,
    /// `max |u − (a + b)/2|` on the hyperplane `xₙ = 0`.
    pub hyperplane_max: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Symmetry checks for an extremal with pins at `±eₙ`.
pub fn verify_symmetries(res: &ExtremalResult, threshold: f64) -> Result<SymmetryReport> {
    let u = &res.u;
    let lattice = u.lattice();
    if !res.pins.is_canonical_geometry(lattice) {
        return Err(Error::Precondition("symmetry checks need pins at ±eₙ".into()));
    }
    let last = lattice.dim() - 1;
    let shift = res.pins.a + res.pins.b;
    let mut anti = 0.0f64;
    let mut plane = 0.0f64;
    let mut axis = 0.0f64;
    for i in 0..lattice.len() {
        let c = lattice.centered(i);
        let mut mirrored = c;
        mirrored[last] = -mirrored[last];
        let j = lattice.index_centered(mirrored).expect("box is symmetric");
        anti = anti.max((u.value(i) + u.value(j) - shift).abs());
        if c[last] == 0 {
            plane = plane.max((u.value(i) - 0.5 * shift).abs());
        }
        if lattice.dim() == 2 {
            let k = lattice.index_centered([-c[0], c[1]]).expect("box is symmetric");
            axis = axis.max((u.value(i) - u.value(k)).abs());
        }
    }
    let axis_defect = (lattice.dim() == 2).then_some(axis);
    let pass = anti <= threshold && plane <= threshold && axis_defect.is_none_or(|d| d <= threshold);
    Ok(SymmetryReport { axis_defect, anti_symmetry_defect: anti, hyperplane_max: plane, threshold, pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct PointwiseReport {
    pub min: f64,
    pub max: f64,
    /// `b − tol ≤ u ≤ a + tol` everywhere.
    pub bounds_hold: bool,
    /// `min(u − b, a − u)` over nodes at distance `≥ 2h` from both pins.
    pub strict_margin: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// `b ≤ u ≤ a` with strict inequality away from the pins (`a > b`).
pub fn verify_pointwise_bounds(res: &ExtremalResult, threshold: f64) -> Result<PointwiseReport> {
    let pins = res.pins;
    let (hi, lo) = if pins.a > pins.b { (pins.a, pins.b) } else { (pins.b, pins.a) };
    let u = &res.u;
    let lattice = u.lattice();
    let h = lattice.spacing();
    let min = u.values().iter().copied().fold(f64::INFINITY, f64::min);
    let max = u.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bounds_hold = min >= lo - threshold && max <= hi + threshold;
    let strict_margin = (0..lattice.len())
        .filter(|&i| lattice.distance(i, pins.x0) >= 2.0 * h - 1e-12 && lattice.distance(i, pins.y0) >= 2.0 * h - 1e-12)
        .map(|i| (u.value(i) - lo).min(hi - u.value(i)))
        .fold(f64::INFINITY, f64::min);
    Ok(PointwiseReport { min, max, bounds_hold, strict_margin, threshold, pass: bounds_hold && strict_margin > threshold })
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub argpair: (usize, usize),
    /// Sharp constant for the pin pair: `[v]_C / [u]_W` with `u` the matched extremal.
    pub c_star: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `(rhs − lhs)/rhs`.
    pub residual: f64,
    pub large_exponent_branch: bool,
    /// Whether the matched extremal was obtained by a fresh solve.
    pub resolved: bool,
}

#[derive(Clone, Debug)]
pub struct StabilityOptions {
    pub extremal: ExtremalOptions,
    /// Re-solve when `v`'s Hölder pair differs from the pins of the given
    /// extremal; otherwise such a pair is an error.
    pub allow_resolve: bool,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        Self { extremal: ExtremalOptions { free_far_field: true, ..ExtremalOptions::default() }, allow_resolve: true }
    }
}

/// Checks `(C*/2)^q [u − v]^q + [v]_C^q ≤ C*^q [v]^q` with `q = p` for `p ≥ 2`
/// and `q = p/(p−1)` otherwise, `u` the extremal through `v`'s Hölder pair.
pub fn verify_stability(
    res: &ExtremalResult,
    v: &GridFunction,
    w: &KernelWeights,
    opts: &StabilityOptions,
) -> Result<StabilityReport> {
    if !v.same_lattice_as(w.lattice()) || !res.u.same_lattice_as(w.lattice()) {
        return Err(Error::Mismatch);
    }
    if v.is_constant() {
        return Err(Error::Degenerate("stability needs a non-constant function".into()));
    }
    let hv = holder_seminorm(v)?;
    let (i, j) = hv.argpair;
    let (vi, vj) = (v.value(i), v.value(j));
    if vi == vj {
        return Err(Error::Degenerate("Hölder pair carries equal values".into()));
    }

    // the extremal's value map u ↦ c·u + d reproduces any pin values on the same pair
    let same_pair = (res.pins.x0, res.pins.y0) == (i, j) || (res.pins.x0, res.pins.y0) == (j, i);
    let (u, resolved) = if same_pair && res.free_far_field {
        let (ui, uj) = (res.u.value(i), res.u.value(j));
        let c = (vi - vj) / (ui - uj);
        let d = vi - c * ui;
        (res.u.map(|x| c * x + d)?, false)
    } else if opts.allow_resolve {
        let pins = PinSpec::new(w.lattice(), i, j, vi, vj)?;
        let run = ExtremalOptions { init: InitialGuess::Custom(v.values().to_vec()), free_far_field: true, ..opts.extremal.clone() };
        (solve_extremal_with(w, pins, &run)?.u, true)
    } else {
        return Err(Error::UnmappablePair(i, j));
    };

    let p = w.lattice().params().p();
    let eu = gagliardo_energy(&u, w)?;
    let ev = gagliardo_energy(v, w)?;
    let ed = gagliardo_energy(&u.combine(1.0, v, -1.0)?, w)?;
    let c_star = hv.value / eu.powf(1.0 / p);
    let large = p >= 2.0;
    let q = if large { p } else { p / (p - 1.0) };
    let lhs = (0.5 * c_star).powf(q) * ed.powf(q / p) + hv.value.powf(q);
    let rhs = c_star.powf(q) * ev.powf(q / p);
    Ok(StabilityReport { argpair: (i, j), c_star, lhs, rhs, residual: (rhs - lhs) / rhs, large_exponent_branch: large, resolved })
}
