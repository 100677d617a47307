//! Discrete nonlocal Dirichlet problems with data on the whole complement,
//! the barrier boundary bound, the slit-domain experiment near the origin and
//! the decay of extremals at infinity.
//!
//! The discrete problem is strictly convex, so its unique solution stands in
//! for both the upper and the lower Perron solution.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extremal::{solve_extremal_with, ExtremalOptions, ExtremalResult, PinSpec};
use crate::grid::{FracParams, GridFunction, Lattice, Point};
use crate::seminorm::KernelWeights;
use crate::solver::{minimize, Optimizer, Problem, SolveOutcome, SolverOptions, Stopping};

/// Complement values: `g` on every node with `free[i] == false`, and the far
/// field outside the box. Values of `g` at free nodes serve as the initial
/// guess.
#[derive(Clone, Debug)]
pub struct ComplementData {
    pub lattice: Arc<Lattice>,
    pub free: Vec<bool>,
    pub g: Vec<f64>,
    pub far_field: f64,
}

impl ComplementData {
    pub fn new(lattice: Arc<Lattice>, free: Vec<bool>, g: Vec<f64>, far_field: f64) -> Result<Self> {
        if free.len() != lattice.len() || g.len() != lattice.len() {
            return Err(Error::InvalidParameter("mask and data must have one entry per node".into()));
        }
        if !free.iter().any(|&f| f) {
            return Err(Error::InvalidParameter("no free node".into()));
        }
        if free.iter().all(|&f| f) {
            return Err(Error::InvalidParameter("no constrained node".into()));
        }
        if g.iter().any(|v| !v.is_finite()) || !far_field.is_finite() {
            return Err(Error::InvalidParameter("complement data must be finite".into()));
        }
        Ok(Self { lattice, free, g, far_field })
    }

    /// `(min, max)` of the constrained values and the far field.
    pub fn range(&self) -> (f64, f64) {
        self.g
            .iter()
            .zip(&self.free)
            .filter(|(_, &f)| !f)
            .fold((self.far_field, self.far_field), |(lo, hi), (&v, _)| (lo.min(v), hi.max(v)))
    }

    pub fn negated(&self) -> Self {
        Self { g: self.g.iter().map(|v| -v).collect(), far_field: -self.far_field, ..self.clone() }
    }
}

/// Stopping on the operator residual, nonlinear Gauss–Seidel.
pub fn dirichlet_options(tol: f64, max_iter: usize) -> SolverOptions {
    SolverOptions { tol, max_iter, optimizer: Optimizer::GaussSeidel, stopping: Stopping::Operator, ..SolverOptions::default() }
}

/// Solves for the discrete (s,p)-harmonic function at the free nodes.
pub fn solve_dirichlet(w: &KernelWeights, data: &ComplementData, tol: f64, max_iter: usize) -> Result<GridFunction> {
    solve_dirichlet_with(w, data, &dirichlet_options(tol, max_iter)).map(|(u, _)| u)
}

pub fn solve_dirichlet_with(w: &KernelWeights, data: &ComplementData, opts: &SolverOptions) -> Result<(GridFunction, SolveOutcome)> {
    if !Arc::ptr_eq(w.lattice(), &data.lattice) && **w.lattice() != *data.lattice {
        return Err(Error::Mismatch);
    }
    let (lo, hi) = data.range();
    let init: Vec<f64> = data
        .g
        .iter()
        .zip(&data.free)
        .map(|(&v, &f)| if f { v.clamp(lo, hi) } else { v })
        .collect();
    let problem = Problem { weights: w, fixed: data.free.iter().map(|f| !f).collect(), free_far_field: false };
    let out = minimize(&problem, init, data.far_field, opts);
    if !out.converged {
        return Err(Error::NonConvergence { iterations: out.iterations, grad_norm: out.grad_norm });
    }
    let u = GridFunction::new(data.lattice.clone(), out.values.clone(), data.far_field)?;
    Ok((u, out))
}

#[derive(Clone, Debug, Serialize)]
pub struct BarrierBoundReport {
    pub exponent: f64,
    /// `M (r₀ − r₁)^{−β}`.
    pub constant: f64,
    /// `max |u(y)| / (constant · |x − y|^β)` over free `y` and boundary `x`.
    pub worst_ratio: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub boundary_nodes: usize,
    pub pass: bool,
}

/// Constrained nodes with a free lattice neighbor.
fn boundary_nodes(lattice: &Lattice, free: &[bool]) -> Vec<usize> {
    let n = lattice.dim();
    (0..lattice.len())
        .filter(|&i| !free[i])
        .filter(|&i| {
            let c = lattice.centered(i);
            (0..n).any(|axis| {
                [-1i64, 1].iter().any(|&step| {
                    let mut d = c;
                    d[axis] += step;
                    lattice.index_centered(d).is_some_and(|j| free[j])
                })
            })
        })
        .collect()
}

fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Checks `|u(y)| ≤ M (r₀ − r₁)^{−β} |x − y|^β` for free `y` and boundary
/// nodes `x ∈ B(x₀, r₁)`, given `g = 0` on `B(x₀, r₀)` and `|g| ≤ M`.
pub fn verify_barrier_bound(
    u: &GridFunction,
    data: &ComplementData,
    x0: Point,
    r0: f64,
    r1: f64,
    bound: f64,
) -> Result<BarrierBoundReport> {
    if !(0.0 < r1 && r1 < r0) {
        return Err(Error::InvalidParameter(format!("radii must satisfy 0 < r1 < r0, got {r1}, {r0}")));
    }
    let lattice = &data.lattice;
    if !u.same_lattice_as(lattice) {
        return Err(Error::Mismatch);
    }
    for i in 0..lattice.len() {
        if data.free[i] {
            continue;
        }
        let g = data.g[i];
        if g.abs() > bound {
            return Err(Error::Precondition(format!("|g| exceeds M = {bound} at node {i}")));
        }
        if distance(lattice.point(i), x0) < r0 && g != 0.0 {
            return Err(Error::Precondition(format!("g does not vanish at node {i} inside B(x0, r0)")));
        }
    }
    if data.far_field.abs() > bound {
        return Err(Error::Precondition("far field exceeds M".into()));
    }
    let beta = lattice.params().barrier_exponent();
    let constant = bound * (r0 - r1).powf(-beta);
    let anchors: Vec<usize> = boundary_nodes(lattice, &data.free)
        .into_iter()
        .filter(|&i| distance(lattice.point(i), x0) < r1)
        .collect();
    let mut worst_ratio = 0.0f64;
    let mut worst_pair = None;
    for y in (0..lattice.len()).filter(|&y| data.free[y]) {
        let uy = u.value(y).abs();
        for &x in &anchors {
            let ratio = uy / (constant * lattice.distance(x, y).powf(beta));
            if ratio > worst_ratio {
                worst_ratio = ratio;
                worst_pair = Some((x, y));
            }
        }
    }
    Ok(BarrierBoundReport {
        exponent: beta,
        constant,
        worst_ratio,
        worst_pair,
        boundary_nodes: anchors.len(),
        pass: worst_ratio <= 1.05,
    })
}

/// Slit-domain data on `[−L, L]²`: free nodes in the open unit disk off the
/// slit `{x₂ = 0, x₁ ≥ 0}`; `g = 1` outside the disk and at the origin, `g = 0`
/// on the rest of the slit.
pub fn slit_data(lattice: &Arc<Lattice>) -> Result<ComplementData> {
    if lattice.dim() != 2 {
        return Err(Error::InvalidParameter("the slit experiment is two-dimensional".into()));
    }
    let h = lattice.spacing();
    let mut free = Vec::with_capacity(lattice.len());
    let mut g = Vec::with_capacity(lattice.len());
    for i in 0..lattice.len() {
        let c = lattice.centered(i);
        let x = lattice.point(i);
        let r = x[0].hypot(x[1]);
        let outside = r >= 1.0 - 1e-12 * h;
        let on_slit = c[1] == 0 && c[0] >= 0;
        free.push(!outside && !on_slit);
        g.push(if outside || c == [0, 0] { 1.0 } else if on_slit { 0.0 } else { 0.5 });
    }
    ComplementData::new(lattice.clone(), free, g, 1.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct RingSample {
    pub radius: f64,
    pub max: f64,
    pub nodes: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SlitReport {
    pub half_extent: f64,
    pub spacing: f64,
    pub rings: Vec<RingSample>,
    /// Ring maxima increase strictly with the radius.
    pub rings_monotone: bool,
    /// Largest decrease of `ρ ↦ u(ρx)` along lattice rays from the origin.
    pub ray_monotonicity_violation: f64,
    /// `max |u_L + u_U|` for the solutions with data `−U` and `U`.
    pub negation_defect: f64,
    /// `max |u|` on slit nodes, which are constrained to zero.
    pub slit_max: f64,
    pub iterations: usize,
    pub barrier: Option<BarrierBoundReport>,
    /// Solution for the data `U`.
    #[serde(skip)]
    pub solution: GridFunction,
}

/// Free nodes with `||x| − ρ| ≤ h/2`.
fn ring_max(u: &GridFunction, free: &[bool], rho: f64) -> RingSample {
    let lattice = u.lattice();
    let h = lattice.spacing();
    let (mut max, mut nodes) = (0.0f64, 0);
    for i in (0..lattice.len()).filter(|&i| free[i]) {
        if (lattice.norm(i) - rho).abs() <= 0.5 * h + 1e-12 {
            max = max.max(u.value(i).abs());
            nodes += 1;
        }
    }
    RingSample { radius: rho, max, nodes }
}

/// Runs the slit experiment, plus the barrier bound at `x₀ = (½, 0)` with
/// `r₀ = ¼`, `r₁ = ⅙`, `M = 1`.
pub fn run_slit_experiment(params: FracParams, half_extent: f64, spacing: f64, opts: &SolverOptions) -> Result<SlitReport> {
    let lattice = Lattice::build(params, half_extent, spacing)?;
    let w = KernelWeights::build(&lattice);
    let data = slit_data(&lattice)?;
    let (u, out) = solve_dirichlet_with(&w, &data, opts)?;
    let (lower, _) = solve_dirichlet_with(&w, &data.negated(), opts)?;
    let negation_defect = u.combine(1.0, &lower, 1.0)?.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let h = lattice.spacing();
    let mut rings = Vec::new();
    let mut rho = 4.0 * h;
    while rho < 1.0 - 1e-12 {
        rings.push(ring_max(&u, &data.free, rho));
        rho *= 2.0;
    }
    let rings_monotone = rings.windows(2).all(|p| p[0].max < p[1].max);

    let mut ray_violation = 0.0f64;
    for dir in [[0i64, 1], [0, -1], [-1, 0], [1, 1], [1, -1], [-1, 1], [-1, -1]] {
        let mut prev: Option<f64> = None;
        for k in 1.. {
            let Some(i) = lattice.index_centered([k * dir[0], k * dir[1]]) else { break };
            if !data.free[i] {
                break;
            }
            if let Some(p) = prev {
                ray_violation = ray_violation.max(p - u.value(i));
            }
            prev = Some(u.value(i));
        }
    }
    let slit_max = (0..lattice.len())
        .filter(|&i| {
            let c = lattice.centered(i);
            c[1] == 0 && c[0] > 0 && lattice.norm(i) < 1.0
        })
        .fold(0.0f64, |m, i| m.max(u.value(i).abs()));
    let barrier = verify_barrier_bound(&u, &data, [0.5, 0.0], 0.25, 0.25 * 2.0 / 3.0, 1.0).ok();

    Ok(SlitReport {
        half_extent: lattice.half_extent(),
        spacing: h,
        rings,
        rings_monotone,
        ray_monotonicity_violation: ray_violation,
        negation_defect,
        slit_max,
        iterations: out.iterations,
        barrier,
        solution: u,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    /// `(r, max |u − (a+b)/2|)` over nodes with `|x| ≥ r`.
    pub profile: Vec<(f64, f64)>,
    pub strictly_decreasing: bool,
}

/// Deviation of the extremal from `(a + b)/2` outside each radius.
pub fn run_decay_experiment(res: &ExtremalResult, radii: &[f64]) -> Result<DecayReport> {
    let u = &res.u;
    let lattice = u.lattice();
    if !res.pins.is_canonical_geometry(lattice) {
        return Err(Error::Precondition("decay experiment needs pins at ±eₙ".into()));
    }
    let mid = res.pins.midpoint_value();
    let profile: Vec<(f64, f64)> = radii
        .iter()
        .map(|&r| {
            let dev = (0..lattice.len())
                .filter(|&i| lattice.norm(i) >= r - 1e-12)
                .fold(0.0f64, |m, i| m.max((u.value(i) - mid).abs()));
            (r, dev)
        })
        .collect();
    let strictly_decreasing = profile.windows(2).all(|p| p[0].0 < p[1].0 && p[1].1 < p[0].1);
    Ok(DecayReport { profile, strictly_decreasing })
}

#[derive(Clone, Debug, Serialize)]
pub struct HalfSpaceReport {
    /// `min sign(xₙ)·(u − (a+b)/2)` over nodes off the hyperplane.
    pub min_signed_value: f64,
    pub violations: usize,
    pub tolerance: f64,
    pub pass: bool,
}

/// `sign(u − (a+b)/2) = sign(xₙ)` off the hyperplane `xₙ = 0`.
pub fn verify_half_space_sign(res: &ExtremalResult, tolerance: f64) -> Result<HalfSpaceReport> {
    let u = &res.u;
    let lattice = u.lattice();
    if !res.pins.is_canonical_geometry(lattice) || res.pins.a <= res.pins.b {
        return Err(Error::Precondition("half-space sign needs pins at ±eₙ with a > b".into()));
    }
    let last = lattice.dim() - 1;
    let mid = res.pins.midpoint_value();
    let mut min_signed = f64::INFINITY;
    let mut violations = 0;
    for i in 0..lattice.len() {
        let side = lattice.centered(i)[last].signum();
        if side == 0 {
            continue;
        }
        let signed = side as f64 * (u.value(i) - mid);
        min_signed = min_signed.min(signed);
        if signed < -tolerance {
            violations += 1;
        }
    }
    Ok(HalfSpaceReport { min_signed_value: min_signed, violations, tolerance, pass: violations == 0 })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayStudyRow {
    pub half_extent: f64,
    pub decay: DecayReport,
    /// Optimal far field when it is left free.
    pub free_far_field: f64,
    /// `max |u_fixed − u_free|` over nodes.
    pub far_field_sensitivity: f64,
}

/// Decay profiles at radii `{L/4, L/2, L}` for each truncation extent, with the
/// effect of freeing the far field.
pub fn decay_study(params: FracParams, spacing: f64, extents: &[f64], opts: &ExtremalOptions) -> Result<Vec<DecayStudyRow>> {
    extents
        .iter()
        .map(|&l| {
            let lattice = Lattice::build(params, l, spacing)?;
            let w = KernelWeights::build(&lattice);
            let pins = PinSpec::canonical(&lattice);
            let fixed = solve_extremal_with(&w, pins, &ExtremalOptions { free_far_field: false, ..opts.clone() })?;
            let free = solve_extremal_with(&w, pins, &ExtremalOptions { free_far_field: true, ..opts.clone() })?;
            let decay = run_decay_experiment(&fixed, &[0.25 * l, 0.5 * l, l])?;
            Ok(DecayStudyRow {
                half_extent: lattice.half_extent(),
                decay,
                free_far_field: free.u.far_field(),
                far_field_sensitivity: fixed.u.max_abs_diff(&free.u)?,
            })
        })
        .collect()
}
