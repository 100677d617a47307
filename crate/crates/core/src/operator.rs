//! The discrete fractional p-Laplacian, the radial barrier `|x|^β`, and
//! residual reports for harmonicity checks.
//!
//! At node `i` the operator is
//!
//! ```text
//! (−Δ_p)^s u(x_i) ≈ Σ_{j≠i} (w_ij / hⁿ) J_p(u_i − u_j) + T_i J_p(u_i − f)
//! ```
//!
//! which is the lattice form of the principal-value integral. With the energy
//! `E` of [`crate::seminorm::gagliardo_energy`] it satisfies
//! `∂E/∂u_i = 2p·hⁿ·(−Δ_p)^s u(x_i)`, so a stationary point of the constrained
//! energy is exactly a discrete (s,p)-harmonic function off the constraints.

use serde::Serialize;

use crate::energy::{self, PowerLaw};
use crate::error::{Error, Result};
use crate::extremal::ExtremalResult;
use crate::grid::{FracParams, GridFunction, Lattice, Point};
use crate::seminorm::KernelWeights;

/// `J_p(a) = |a|^{p−2} a`, with `J_p(0) = 0`.
pub fn j_p(a: f64, p: f64) -> f64 {
    PowerLaw::new(p).j(a)
}

/// Discrete `(−Δ_p)^s u` at `node`.
pub fn frac_p_laplacian(u: &GridFunction, w: &KernelWeights, node: usize) -> Result<f64> {
    if !u.same_lattice_as(w.lattice()) {
        return Err(Error::Mismatch);
    }
    if node >= u.lattice().len() {
        return Err(Error::InvalidParameter(format!("node {node} out of range")));
    }
    Ok(energy::node_operator(w, u.values(), u.far_field(), node))
}

/// `G(x) = |x|^{(sp−n)/(p−1)}`.
pub fn barrier_value(x: Point, params: &FracParams) -> f64 {
    let r = x[0].hypot(if params.n() == 1 { 0.0 } else { x[1] });
    if r == 0.0 {
        0.0
    } else {
        r.powf(params.barrier_exponent())
    }
}

/// Operator values at a set of nodes, with optional Dirac masses at two pins.
#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    pub nodes: Vec<usize>,
    pub values: Vec<f64>,
    pub max_abs: f64,
    pub mean_abs: f64,
    /// `hⁿ·(−Δ_p)^s u` at `x₀` and `y₀`.
    pub pin_masses: Option<[f64; 2]>,
    /// `J_p(a − b) / (|x₀ − y₀|^{sp−n} C*^p)`.
    pub expected_pin_mass: Option<f64>,
    /// Ratio of the measured to the expected mass at `x₀`.
    pub fitted_factor: Option<f64>,
    /// `|m₀ + m₁| / max(|m₀|, |m₁|)`.
    pub pin_mass_imbalance: Option<f64>,
}

impl Residual {
    fn from_values(nodes: Vec<usize>, values: Vec<f64>) -> Self {
        let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mean_abs = if values.is_empty() {
            0.0
        } else {
            values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64
        };
        Self {
            nodes,
            values,
            max_abs,
            mean_abs,
            pin_masses: None,
            expected_pin_mass: None,
            fitted_factor: None,
            pin_mass_imbalance: None,
        }
    }
}

/// Operator values of `u` at `nodes`.
pub fn operator_residual(u: &GridFunction, w: &KernelWeights, nodes: &[usize]) -> Result<Residual> {
    let values = nodes
        .iter()
        .map(|&i| frac_p_laplacian(u, w, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(Residual::from_values(nodes.to_vec(), values))
}

/// Nodes with `r_min ≤ |x| ≤ r_max`.
pub fn annulus_nodes(lattice: &Lattice, r_min: f64, r_max: f64) -> Vec<usize> {
    let slack = 1e-12 * r_max.max(1.0);
    (0..lattice.len())
        .filter(|&i| {
            let r = lattice.norm(i);
            r >= r_min - slack && r <= r_max + slack
        })
        .collect()
}

/// Samples `G` on the lattice, with far field `G` at radius `L + 1`.
pub fn sampled_barrier(lattice: &std::sync::Arc<Lattice>) -> Result<GridFunction> {
    let params = *lattice.params();
    let far = barrier_value([lattice.half_extent() + 1.0, 0.0], &params);
    GridFunction::from_fn(lattice.clone(), far, |x| barrier_value(x, &params))
}

/// Operator residual of the sampled barrier at `test_nodes`.
pub fn verify_barrier_harmonicity(w: &KernelWeights, test_nodes: &[usize]) -> Result<Residual> {
    let lattice = w.lattice();
    let h = lattice.spacing();
    for &i in test_nodes {
        if i >= lattice.len() {
            return Err(Error::InvalidParameter(format!("node {i} out of range")));
        }
        let r = lattice.norm(i);
        if r == 0.0 {
            return Err(Error::Geometry("the barrier is singular at the origin".into()));
        }
        if r < 2.0 * h - 1e-12 {
            return Err(Error::Precondition(format!("test node {i} lies within 2h of the origin")));
        }
    }
    operator_residual(&sampled_barrier(lattice)?, w, test_nodes)
}

/// Operator values at every node except the pins, plus the pin masses.
pub fn euler_lagrange_residual(res: &ExtremalResult, w: &KernelWeights) -> Result<Residual> {
    let u = &res.u;
    if !u.same_lattice_as(w.lattice()) {
        return Err(Error::Mismatch);
    }
    let lattice = u.lattice();
    let pins = res.pins;
    let free: Vec<usize> = (0..lattice.len()).filter(|&i| i != pins.x0 && i != pins.y0).collect();
    let mut report = operator_residual(u, w, &free)?;

    let hn = lattice.cell_volume();
    let m0 = hn * frac_p_laplacian(u, w, pins.x0)?;
    let m1 = hn * frac_p_laplacian(u, w, pins.y0)?;
    let params = lattice.params();
    let d = lattice.distance(pins.x0, pins.y0);
    let expected = j_p(pins.a - pins.b, params.p()) / (d.powf(params.sp() - params.n() as f64) * res.c_star_hat.powf(params.p()));
    report.pin_masses = Some([m0, m1]);
    report.expected_pin_mass = Some(expected);
    report.fitted_factor = Some(m0 / expected);
    report.pin_mass_imbalance = Some((m0 + m1).abs() / m0.abs().max(m1.abs()));
    Ok(report)
}
