//! Minimization of the discrete p-energy over the unconstrained node values
//! (and optionally the far field), with the remaining values held fixed.
//!
//! Constrained values are eliminated, not penalized. Four methods share the
//! same stopping rule: a limited-memory quasi-Newton method with a diagonal
//! preconditioner (the default), preconditioned gradient descent, nonlinear
//! Gauss–Seidel with exact scalar solves, and its Jacobi variant.

use serde::Serialize;

use crate::energy::{self, PowerLaw};
use crate::seminorm::KernelWeights;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    Lbfgs,
    GradientDescent,
    GaussSeidel,
    Jacobi,
}

impl std::str::FromStr for Optimizer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lbfgs" => Ok(Optimizer::Lbfgs),
            "gradient_descent" | "gd" => Ok(Optimizer::GradientDescent),
            "gauss_seidel" | "gs" => Ok(Optimizer::GaussSeidel),
            "jacobi" => Ok(Optimizer::Jacobi),
            other => Err(format!("unknown optimizer `{other}`")),
        }
    }
}

/// What the tolerance is compared against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stopping {
    /// `max |∂E/∂u_i|` over the unconstrained variables.
    Gradient,
    /// `max |(−Δ_p)^s u(x_i)|`, i.e. the gradient divided by `2p·hⁿ`.
    Operator,
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub optimizer: Optimizer,
    pub stopping: Stopping,
    pub lbfgs_memory: usize,
    pub record_history: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100_000,
            optimizer: Optimizer::Lbfgs,
            stopping: Stopping::Gradient,
            lbfgs_memory: 12,
            record_history: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub values: Vec<f64>,
    pub far_field: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
    pub energy: f64,
    /// Energy after each iteration, when requested.
    pub energy_history: Vec<f64>,
}

/// A constrained energy minimization. `fixed[i]` marks node values that stay
/// at their initial value.
pub struct Problem<'a> {
    pub weights: &'a KernelWeights,
    pub fixed: Vec<bool>,
    pub free_far_field: bool,
}

struct State<'a> {
    w: &'a KernelWeights,
    /// Node values followed by the far field.
    x: Vec<f64>,
    /// Mask over `x`; the last entry is the far field.
    free: Vec<bool>,
    scale: f64,
    energy: f64,
    grad: Vec<f64>,
}

impl<'a> State<'a> {
    fn new(problem: &Problem<'a>, values: Vec<f64>, far_field: f64, stopping: Stopping) -> Self {
        let w = problem.weights;
        let n = values.len();
        let mut x = values;
        x.push(far_field);
        let mut free: Vec<bool> = problem.fixed.iter().map(|f| !f).collect();
        free.push(problem.free_far_field);
        let lattice = w.lattice();
        let scale = match stopping {
            Stopping::Gradient => 1.0,
            Stopping::Operator => 1.0 / (2.0 * lattice.params().p() * lattice.cell_volume()),
        };
        let mut s = Self { w, x, free, scale, energy: 0.0, grad: vec![0.0; n + 1] };
        s.refresh();
        s
    }

    fn evaluate(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let n = x.len() - 1;
        let (e, gf) = energy::energy_and_gradient(self.w, &x[..n], x[n], &mut grad[..n]);
        grad[n] = gf;
        for (g, &f) in grad.iter_mut().zip(&self.free) {
            if !f {
                *g = 0.0;
            }
        }
        e
    }

    fn refresh(&mut self) {
        let mut g = std::mem::take(&mut self.grad);
        self.energy = self.evaluate(&self.x, &mut g);
        self.grad = g;
    }

    fn norm(&self) -> f64 {
        self.scale * self.grad.iter().fold(0.0f64, |m, g| m.max(g.abs()))
    }

    fn finish(self, iterations: usize, converged: bool, history: Vec<f64>) -> SolveOutcome {
        let grad_norm = self.norm();
        let mut x = self.x;
        let far_field = x.pop().unwrap_or(0.0);
        SolveOutcome { values: x, far_field, iterations, grad_norm, converged, energy: self.energy, energy_history: history }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Diagonal of the `p = 2` energy Hessian up to the factor `2p`.
fn diagonal(w: &KernelWeights, free: &[bool]) -> Vec<f64> {
    let lattice = w.lattice();
    let n = lattice.len();
    let hn = lattice.cell_volume();
    let mut d: Vec<f64> = (0..n)
        .map(|i| {
            let mut row = 0.0;
            w.for_each_partner(i, |_, wij| row += wij);
            row + hn * w.exterior()[i]
        })
        .collect();
    d.push(hn * w.exterior().iter().sum::<f64>());
    for (v, &f) in d.iter_mut().zip(free) {
        if !f || *v <= 0.0 {
            *v = 1.0;
        }
    }
    d
}

/// Runs the chosen method from `values`/`far_field`. Fixed entries keep their
/// initial values.
pub fn minimize(problem: &Problem<'_>, values: Vec<f64>, far_field: f64, opts: &SolverOptions) -> SolveOutcome {
    assert_eq!(values.len(), problem.fixed.len());
    let state = State::new(problem, values, far_field, opts.stopping);
    match opts.optimizer {
        Optimizer::Lbfgs => descend(state, opts, opts.lbfgs_memory.max(1)),
        Optimizer::GradientDescent => descend(state, opts, 0),
        Optimizer::GaussSeidel => relax(state, opts, false),
        Optimizer::Jacobi => relax(state, opts, true),
    }
}

/// Line-search descent; `memory = 0` is preconditioned gradient descent.
fn descend(mut st: State<'_>, opts: &SolverOptions, memory: usize) -> SolveOutcome {
    let dim = st.x.len();
    let mut precond = diagonal(st.w, &st.free);
    let adaptive = st.w.lattice().params().p() > 2.0;
    let mut pairs: std::collections::VecDeque<(Vec<f64>, Vec<f64>, f64)> = Default::default();
    let mut history = Vec::new();
    let mut trial = vec![0.0; dim];
    let mut trial_grad = vec![0.0; dim];
    let mut iterations = 0;

    while iterations < opts.max_iter {
        if st.norm() <= opts.tol {
            return st.finish(iterations, true, history);
        }
        iterations += 1;

        let mut accepted = false;
        for attempt in 0..2 {
            if attempt == 1 {
                if pairs.is_empty() {
                    break;
                }
                pairs.clear();
            }
            let mut dir = direction(&st.grad, &precond, &pairs);
            let mut slope = dot(&st.grad, &dir);
            if !(slope < 0.0) {
                pairs.clear();
                dir = direction(&st.grad, &precond, &pairs);
                slope = dot(&st.grad, &dir);
                if !(slope < 0.0) {
                    break;
                }
            }
            let mut t = if pairs.is_empty() {
                let step = dir.iter().fold(0.0f64, |m, d| m.max(d.abs()));
                let size = st.x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                (0.1 * size / step).min(1.0)
            } else {
                1.0
            };
            for _ in 0..60 {
                for k in 0..dim {
                    trial[k] = st.x[k] + t * dir[k];
                }
                let e = st.evaluate(&trial, &mut trial_grad);
                let trial_slope = dot(&trial_grad, &dir);
                let armijo = e <= st.energy + 1e-4 * t * slope;
                if e.is_finite() && (armijo || trial_slope <= 0.0) {
                    if memory > 0 {
                        let s: Vec<f64> = dir.iter().map(|d| t * d).collect();
                        let y: Vec<f64> = trial_grad.iter().zip(&st.grad).map(|(a, b)| a - b).collect();
                        let sy = dot(&s, &y);
                        if sy > 1e-300 && sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
                            if pairs.len() == memory {
                                pairs.pop_front();
                            }
                            pairs.push_back((s, y, 1.0 / sy));
                        }
                    }
                    std::mem::swap(&mut st.x, &mut trial);
                    std::mem::swap(&mut st.grad, &mut trial_grad);
                    st.energy = e;
                    accepted = true;
                    break;
                }
                // secant step on the directional derivative, kept inside the bracket
                let secant = if trial_slope.is_finite() && trial_slope > slope {
                    t * (-slope) / (trial_slope - slope)
                } else {
                    0.5 * t
                };
                t = secant.clamp(0.05 * t, 0.9 * t);
            }
            if accepted {
                break;
            }
        }
        if !accepted {
            log::debug!("line search stalled at iteration {iterations}, gradient {:e}", st.norm());
            break;
        }
        if opts.record_history {
            history.push(st.energy);
        }
        if adaptive && iterations % 10 == 1 {
            refresh_curvature(&st, &mut precond);
        }
    }
    let converged = st.norm() <= opts.tol;
    st.finish(iterations, converged, history)
}

/// Replaces the preconditioner by the current Hessian diagonal, floored.
fn refresh_curvature(st: &State<'_>, precond: &mut [f64]) {
    let n = precond.len() - 1;
    energy::curvature_diagonal(st.w, &st.x[..n], st.x[n], &mut precond[..n]);
    let hn = st.w.lattice().cell_volume();
    let p = st.w.lattice().params().p();
    precond[n] = hn * st.w.exterior().iter().zip(&st.x[..n]).map(|(t, u)| t * (u - st.x[n]).abs().powf(p - 2.0)).sum::<f64>();
    let top = precond.iter().copied().fold(0.0f64, f64::max);
    let floor = if top > 0.0 { 1e-8 * top } else { 1.0 };
    for (v, &f) in precond.iter_mut().zip(&st.free) {
        if !f {
            *v = 1.0;
        } else if !(*v >= floor) {
            *v = floor;
        }
    }
}

/// Two-loop recursion with initial matrix `γ·D⁻¹`.
fn direction(grad: &[f64], precond: &[f64], pairs: &std::collections::VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = grad.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * dot(s, &q);
        for (qk, yk) in q.iter_mut().zip(y) {
            *qk -= a * yk;
        }
        alphas.push(a);
    }
    let gamma = match pairs.back() {
        Some((s, y, _)) => {
            let yhy: f64 = y.iter().zip(precond).map(|(v, d)| v * v / d).sum();
            if yhy > 0.0 {
                dot(s, y) / yhy
            } else {
                1.0
            }
        }
        None => 1.0,
    };
    for (qk, d) in q.iter_mut().zip(precond) {
        *qk *= gamma / d;
    }
    for ((s, y, rho), a) in pairs.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        for (qk, sk) in q.iter_mut().zip(s) {
            *qk += (a - b) * sk;
        }
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

/// Root of the strictly increasing `t ↦ Σ_k c_k J_p(t − v_k)` by Newton steps
/// safeguarded with bisection on `[min v, max v]`.
pub(crate) fn balance_root(law: PowerLaw, coeffs: &[f64], anchors: &[f64], start: f64) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (&c, &v) in coeffs.iter().zip(anchors) {
        if c > 0.0 {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !(lo <= hi) {
        return start;
    }
    if lo == hi {
        return lo;
    }
    if let PowerLaw::Two = law {
        let (num, den) = coeffs.iter().zip(anchors).fold((0.0, 0.0), |(n, d), (&c, &v)| (n + c * v, d + c));
        return (num / den).clamp(lo, hi);
    }
    let eval = |t: f64| {
        coeffs.iter().zip(anchors).fold((0.0, 0.0), |(f, df), (&c, &v)| {
            let d = t - v;
            (f + c * law.j(d), df + c * law.dj(d))
        })
    };
    let mut t = start.clamp(lo, hi);
    for _ in 0..200 {
        let (f, df) = eval(t);
        if f == 0.0 {
            return t;
        }
        if f > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        // stop once the bracket holds no representable midpoint
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let newton = t - f / df;
        t = if df.is_finite() && df > 0.0 && newton > lo && newton < hi {
            if (newton - t).abs() <= 1e-16 * t.abs().max(1.0) {
                return newton;
            }
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    t
}

/// Nonlinear Gauss–Seidel (in place) or Jacobi (from the previous sweep).
fn relax(mut st: State<'_>, opts: &SolverOptions, jacobi: bool) -> SolveOutcome {
    let w = st.w;
    let lattice = w.lattice();
    let law = PowerLaw::new(lattice.params().p());
    let hn = lattice.cell_volume();
    let n = lattice.len();
    let mut coeffs = vec![0.0; n];
    let mut anchors = vec![0.0; n];
    let mut history = Vec::new();
    let mut iterations = 0;

    while iterations < opts.max_iter {
        if st.norm() <= opts.tol {
            return st.finish(iterations, true, history);
        }
        iterations += 1;
        let source = if jacobi { Some(st.x.clone()) } else { None };
        for i in 0..n {
            if !st.free[i] {
                continue;
            }
            let x = source.as_deref().unwrap_or(&st.x);
            let mut k = 0;
            w.for_each_partner(i, |j, wij| {
                coeffs[k] = wij;
                anchors[k] = x[j];
                k += 1;
            });
            coeffs[k] = hn * w.exterior()[i];
            anchors[k] = x[n];
            let start = x[i];
            st.x[i] = balance_root(law, &coeffs[..=k], &anchors[..=k], start);
        }
        if st.free[n] {
            let x = source.as_deref().unwrap_or(&st.x);
            let start = x[n];
            st.x[n] = balance_root(law, w.exterior(), &x[..n], start);
        }
        st.refresh();
        if opts.record_history {
            history.push(st.energy);
        }
    }
    let converged = st.norm() <= opts.tol;
    st.finish(iterations, converged, history)
}
