//! Pairwise p-energy sweeps shared by the seminorm, the operator and the
//! solvers.
//!
//! The discrete energy of node values `u` with far field `f` is
//!
//! ```text
//! E(u) = Σ_{i≠j} w_ij |u_i − u_j|^p + 2 hⁿ Σ_i T_i |u_i − f|^p
//! ```
//!
//! where `T_i` is the exterior kernel integral at node `i`. The ordered-pair sum
//! is accumulated over `i < j` in row-major order and then doubled. Its partial
//! derivative is `∂E/∂u_i = 2p (Σ_j w_ij J_p(u_i − u_j) + hⁿ T_i J_p(u_i − f))`.

use crate::seminorm::KernelWeights;

/// `J_p` and `|·|^p` with cheap paths for the common exponents.
#[derive(Clone, Copy, Debug)]
pub(crate) enum PowerLaw {
    Two,
    Three,
    Four,
    ThreeHalves,
    General(f64),
}

impl PowerLaw {
    pub(crate) fn new(p: f64) -> Self {
        match p {
            _ if p == 2.0 => PowerLaw::Two,
            _ if p == 3.0 => PowerLaw::Three,
            _ if p == 4.0 => PowerLaw::Four,
            _ if p == 1.5 => PowerLaw::ThreeHalves,
            _ => PowerLaw::General(p),
        }
    }

    #[inline]
    pub(crate) fn j(self, d: f64) -> f64 {
        match self {
            PowerLaw::Two => d,
            PowerLaw::Three => d.abs() * d,
            PowerLaw::Four => d * d * d,
            PowerLaw::ThreeHalves => d.abs().sqrt().copysign(d),
            PowerLaw::General(p) => {
                if d == 0.0 {
                    0.0
                } else {
                    d.abs().powf(p - 1.0).copysign(d)
                }
            }
        }
    }

    /// `J_p'(d) = (p − 1)|d|^{p−2}`; infinite at `0` when `p < 2`.
    #[inline]
    pub(crate) fn dj(self, d: f64) -> f64 {
        match self {
            PowerLaw::Two => 1.0,
            PowerLaw::Three => 2.0 * d.abs(),
            PowerLaw::Four => 3.0 * d * d,
            PowerLaw::ThreeHalves => 0.5 / d.abs().sqrt(),
            PowerLaw::General(p) => (p - 1.0) * d.abs().powf(p - 2.0),
        }
    }

    #[inline]
    pub(crate) fn pow(self, d: f64) -> f64 {
        self.j(d) * d
    }
}

/// Upper-triangle pair sweep: returns `Σ_{i<j} w_ij |u_i − u_j|^p` and, when
/// `pair_grad` is given, adds `Σ_j w_ij J_p(u_i − u_j)` into it.
fn sweep<J: Fn(f64) -> f64>(w: &KernelWeights, u: &[f64], mut pair_grad: Option<&mut [f64]>, j: J) -> f64 {
    let (rows, cols) = w.shape();
    let side = 2 * cols - 1;
    let table = w.table();
    let mut total = 0.0;
    for ir in 0..rows {
        for ic in 0..cols {
            let i = ir * cols + ic;
            let ui = u[i];
            let mut gi = 0.0;
            let mut ei = 0.0;
            for jr in ir..rows {
                let start = if jr == ir { ic + 1 } else { 0 };
                let base = (jr - ir + rows - 1) * side + (cols - 1) - ic;
                let trow = &table[base..base + cols];
                let off = jr * cols;
                match pair_grad.as_deref_mut() {
                    Some(g) => {
                        let grow = &mut g[off..off + cols];
                        let urow = &u[off..off + cols];
                        for jc in start..cols {
                            let d = ui - urow[jc];
                            let jd = trow[jc] * j(d);
                            ei += jd * d;
                            gi += jd;
                            grow[jc] -= jd;
                        }
                    }
                    None => {
                        let urow = &u[off..off + cols];
                        for jc in start..cols {
                            let d = ui - urow[jc];
                            ei += trow[jc] * j(d) * d;
                        }
                    }
                }
            }
            if let Some(g) = pair_grad.as_deref_mut() {
                g[i] += gi;
            }
            total += ei;
        }
    }
    total
}

fn dispatch(law: PowerLaw, w: &KernelWeights, u: &[f64], grad: Option<&mut [f64]>) -> f64 {
    match law {
        PowerLaw::Two => sweep(w, u, grad, |d| d),
        PowerLaw::Three => sweep(w, u, grad, |d| d.abs() * d),
        PowerLaw::Four => sweep(w, u, grad, |d| d * d * d),
        PowerLaw::ThreeHalves => sweep(w, u, grad, |d: f64| d.abs().sqrt().copysign(d)),
        PowerLaw::General(_) => sweep(w, u, grad, |d| law.j(d)),
    }
}

/// Full discrete p-energy including the far-field cross terms.
pub(crate) fn energy(w: &KernelWeights, u: &[f64], far_field: f64) -> f64 {
    let law = PowerLaw::new(w.lattice().params().p());
    let pairs = dispatch(law, w, u, None);
    let hn = w.lattice().cell_volume();
    let exterior: f64 = u
        .iter()
        .zip(w.exterior())
        .map(|(&ui, &t)| t * law.pow(ui - far_field))
        .sum();
    2.0 * pairs + 2.0 * hn * exterior
}

/// Energy plus its gradient with respect to every node value (written into
/// `grad`) and with respect to the far field (returned).
pub(crate) fn energy_and_gradient(w: &KernelWeights, u: &[f64], far_field: f64, grad: &mut [f64]) -> (f64, f64) {
    let p = w.lattice().params().p();
    let law = PowerLaw::new(p);
    grad.iter_mut().for_each(|g| *g = 0.0);
    let pairs = dispatch(law, w, u, Some(grad));
    let hn = w.lattice().cell_volume();
    let mut exterior = 0.0;
    let mut far_grad = 0.0;
    for ((g, &ui), &t) in grad.iter_mut().zip(u).zip(w.exterior()) {
        let jd = t * law.j(ui - far_field);
        exterior += jd * (ui - far_field);
        *g = 2.0 * p * (*g + hn * jd);
        far_grad -= jd;
    }
    (2.0 * pairs + 2.0 * hn * exterior, 2.0 * p * hn * far_grad)
}

/// `Σ_{j≠i} (w_ij / hⁿ) J_p(u_i − u_j) + T_i J_p(u_i − f)` at a single node.
pub(crate) fn node_operator(w: &KernelWeights, u: &[f64], far_field: f64, i: usize) -> f64 {
    let law = PowerLaw::new(w.lattice().params().p());
    let hn = w.lattice().cell_volume();
    let ui = u[i];
    let mut acc = 0.0;
    w.for_each_partner(i, |j, wij| acc += wij * law.j(ui - u[j]));
    acc / hn + w.exterior()[i] * law.j(ui - far_field)
}

/// `Σ_j w_ij |u_i − u_j|^{p−2} + hⁿ T_i |u_i − f|^{p−2}` per node, the
/// Hessian diagonal up to the factor `2p(p−1)`. Meaningful for `p ≥ 2`.
pub(crate) fn curvature_diagonal(w: &KernelWeights, u: &[f64], far_field: f64, out: &mut [f64]) {
    let p = w.lattice().params().p();
    let hn = w.lattice().cell_volume();
    let pw = |d: f64| match p {
        _ if p == 2.0 => 1.0,
        _ if p == 3.0 => d.abs(),
        _ if p == 4.0 => d * d,
        _ => d.abs().powf(p - 2.0),
    };
    for (i, slot) in out.iter_mut().enumerate().take(u.len()) {
        let ui = u[i];
        let mut acc = 0.0;
        w.for_each_partner(i, |j, wij| acc += wij * pw(ui - u[j]));
        *slot = acc + hn * w.exterior()[i] * pw(ui - far_field);
    }
}
