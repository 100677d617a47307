//! Discrete Gagliardo and Hölder seminorms, Campanato mean oscillation, and the
//! quadrature weights of the singular kernel `|x − y|^{−(n+sp)}`.
//!
//! Weights are translation invariant on the lattice, so they are stored once per
//! integer offset. Well-separated pairs (`|x_i − x_j| ≥ 2h`) use the midpoint
//! rule `h^{2n}/|x_i − x_j|^{n+sp}`; closer pairs split both cells into `4ⁿ`
//! subcells and sum the midpoint rule over subcell pairs.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::energy;
use crate::error::{Error, Result};
use crate::grid::{GridFunction, Lattice, Point};
use crate::quadrature::exterior_kernel_integral;

/// Subdivisions per axis for near-diagonal pairs.
const SUBCELLS: usize = 4;

#[derive(Clone, Debug)]
pub struct KernelWeights {
    lattice: Arc<Lattice>,
    rows: usize,
    cols: usize,
    table: Vec<f64>,
    exterior: Vec<f64>,
}

/// Subcell-refined weight for the integer offset `k` (in units of `h`).
fn refined_weight(k: [i64; 2], n: usize, h: f64, exponent: f64) -> f64 {
    let sub = h / SUBCELLS as f64;
    let centers: Vec<f64> = (0..SUBCELLS).map(|a| (a as f64 + 0.5) * sub - 0.5 * h).collect();
    let dx = k[0] as f64 * h;
    let dy = k[1] as f64 * h;
    let mut total = 0.0;
    match n {
        1 => {
            for &a in &centers {
                for &b in &centers {
                    let r = (dx + b - a).abs();
                    if r > 0.0 {
                        total += r.powf(-exponent);
                    }
                }
            }
            total * sub.powi(2)
        }
        _ => {
            for &a0 in &centers {
                for &a1 in &centers {
                    for &b0 in &centers {
                        for &b1 in &centers {
                            let r = (dx + b0 - a0).hypot(dy + b1 - a1);
                            if r > 0.0 {
                                total += r.powf(-exponent);
                            }
                        }
                    }
                }
            }
            total * sub.powi(4)
        }
    }
}

impl KernelWeights {
    pub fn build(lattice: &Arc<Lattice>) -> Self {
        let n = lattice.dim();
        let m = lattice.per_axis();
        let (rows, cols) = if n == 1 { (1, m) } else { (m, m) };
        let h = lattice.spacing();
        let params = lattice.params();
        let exponent = params.kernel_exponent();
        let far_scale = h.powi(2 * n as i32);

        let row_span = 2 * rows - 1;
        let col_span = 2 * cols - 1;
        let mut table = vec![0.0; row_span * col_span];
        let mut near = HashMap::new();
        for r in 0..row_span {
            for c in 0..col_span {
                let dr = r as i64 - (rows as i64 - 1);
                let dc = c as i64 - (cols as i64 - 1);
                let k = if n == 1 { [dc, 0] } else { [dr, dc] };
                let sq = k[0] * k[0] + k[1] * k[1];
                table[r * col_span + c] = match sq {
                    0 => 0.0,
                    1..=3 => {
                        // symmetric in sign and axis order
                        let key = (k[0].abs().min(k[1].abs()), k[0].abs().max(k[1].abs()));
                        *near.entry(key).or_insert_with(|| refined_weight(k, n, h, exponent))
                    }
                    _ => far_scale / ((sq as f64).sqrt() * h).powf(exponent),
                };
            }
        }

        let half_width = lattice.cell_half_width();
        let sp = params.sp();
        let mut cache: HashMap<(i64, i64), f64> = HashMap::new();
        let exterior = (0..lattice.len())
            .map(|i| {
                let c = lattice.centered(i);
                let key = (c[0].abs().min(c[1].abs()), c[0].abs().max(c[1].abs()));
                let key = if n == 1 { (c[0].abs(), 0) } else { key };
                *cache.entry(key).or_insert_with(|| {
                    let x = [key.0 as f64 * h, key.1 as f64 * h];
                    let x = if n == 1 { [key.0 as f64 * h, 0.0] } else { x };
                    exterior_kernel_integral(x, n, half_width, sp)
                })
            })
            .collect();

        Self { lattice: lattice.clone(), rows, cols, table, exterior }
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub(crate) fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub(crate) fn table(&self) -> &[f64] {
        &self.table
    }

    /// Weight for the centered integer offset `k = c_j − c_i`.
    pub fn offset_weight(&self, k: [i64; 2]) -> f64 {
        let (dr, dc) = if self.lattice.dim() == 1 { (0, k[0]) } else { (k[0], k[1]) };
        let r = (dr + self.rows as i64 - 1) as usize;
        let c = (dc + self.cols as i64 - 1) as usize;
        self.table[r * (2 * self.cols - 1) + c]
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.lattice.centered(i), self.lattice.centered(j));
        self.offset_weight([b[0] - a[0], b[1] - a[1]])
    }

    /// Exterior kernel integrals `T_i`, one per node.
    pub fn exterior(&self) -> &[f64] {
        &self.exterior
    }

    pub(crate) fn for_each_partner(&self, i: usize, mut f: impl FnMut(usize, f64)) {
        let side = 2 * self.cols - 1;
        let (ir, ic) = (i / self.cols, i % self.cols);
        for jr in 0..self.rows {
            let base = (jr + self.rows - 1 - ir) * side + (self.cols - 1) - ic;
            for jc in 0..self.cols {
                let j = jr * self.cols + jc;
                if j != i {
                    f(j, self.table[base + jc]);
                }
            }
        }
    }

    /// `max_i |Σ_j (w_ij − w_ji)|`, zero by construction.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.lattice.len();
        (0..n)
            .map(|i| (0..n).map(|j| self.weight(i, j) - self.weight(j, i)).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    fn check(&self, u: &GridFunction) -> Result<()> {
        if u.same_lattice_as(&self.lattice) {
            Ok(())
        } else {
            Err(Error::Mismatch)
        }
    }
}

/// `[u]^p`: the discrete Gagliardo p-energy over ℝⁿ × ℝⁿ.
pub fn gagliardo_energy(u: &GridFunction, w: &KernelWeights) -> Result<f64> {
    w.check(u)?;
    Ok(energy::energy(w, u.values(), u.far_field()))
}

/// `[u]_{W^{s,p}}`, including the cross terms with the far field.
pub fn gagliardo_seminorm(u: &GridFunction, w: &KernelWeights) -> Result<f64> {
    let p = w.lattice().params().p();
    Ok(gagliardo_energy(u, w)?.powf(1.0 / p))
}

/// Gagliardo p-energy restricted to node pairs inside the closed ball
/// `B(center, radius)`; no far-field terms.
pub fn regional_energy(u: &GridFunction, w: &KernelWeights, center: Point, radius: f64) -> Result<f64> {
    w.check(u)?;
    let lattice = u.lattice();
    let law = energy::PowerLaw::new(lattice.params().p());
    let inside: Vec<usize> = (0..lattice.len())
        .filter(|&i| dist(lattice.point(i), center) <= radius * (1.0 + 1e-12))
        .collect();
    let mut total = 0.0;
    for (a, &i) in inside.iter().enumerate() {
        for &j in &inside[a + 1..] {
            total += w.weight(i, j) * law.pow(u.value(i) - u.value(j));
        }
    }
    Ok(2.0 * total)
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HolderSeminorm {
    pub value: f64,
    /// Maximizing pair `(i, j)` with `i < j`, lexicographically smallest on ties.
    pub argpair: (usize, usize),
}

/// Discrete Hölder seminorm `max_{i<j} |u_i − u_j| / |x_i − x_j|^α` over nodes.
pub fn holder_seminorm(u: &GridFunction) -> Result<HolderSeminorm> {
    let lattice = u.lattice();
    let len = lattice.len();
    if len < 2 {
        return Err(Error::Precondition("Hölder seminorm needs two nodes".into()));
    }
    let alpha = lattice.params().alpha();
    let h = lattice.spacing();
    let n = lattice.dim();
    let m = lattice.per_axis() as i64;
    // |k h|^{-α} by offset, indexed like the weight table
    let span = 2 * m - 1;
    let rows = if n == 1 { 1 } else { span };
    let mut inv = vec![0.0; (rows * span) as usize];
    for r in 0..rows {
        for c in 0..span {
            let dr = if n == 1 { 0 } else { r - (m - 1) };
            let dc = c - (m - 1);
            let d = ((dr * dr + dc * dc) as f64).sqrt() * h;
            inv[(r * span + c) as usize] = if d > 0.0 { d.powf(-alpha) } else { 0.0 };
        }
    }
    let values = u.values();
    let mut best = HolderSeminorm { value: f64::NEG_INFINITY, argpair: (0, 1) };
    for i in 0..len {
        let ci = lattice.centered(i);
        let ui = values[i];
        for (j, &uj) in values.iter().enumerate().skip(i + 1) {
            let cj = lattice.centered(j);
            let (dr, dc) = if n == 1 { (0, cj[0] - ci[0]) } else { (cj[0] - ci[0], cj[1] - ci[1]) };
            let q = (ui - uj).abs() * inv[((dr + if n == 1 { 0 } else { m - 1 }) * span + dc + m - 1) as usize];
            if q > best.value {
                best = HolderSeminorm { value: q, argpair: (i, j) };
            }
        }
    }
    Ok(best)
}

/// `ρ^{−α} · mean_{D} |u − mean_D u|` over the nodes of the closed ball
/// `D = B(center, ρ)` inside the box.
pub fn mean_oscillation(u: &GridFunction, center: Point, rho: f64) -> Result<f64> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::InvalidParameter(format!("radius {rho} must be positive")));
    }
    let lattice = u.lattice();
    let nodes: Vec<f64> = (0..lattice.len())
        .filter(|&i| dist(lattice.point(i), center) <= rho * (1.0 + 1e-12))
        .map(|i| u.value(i))
        .collect();
    if nodes.is_empty() {
        return Err(Error::EmptyRegion { center, rho });
    }
    let count = nodes.len() as f64;
    let mean = nodes.iter().sum::<f64>() / count;
    let deviation = nodes.iter().map(|v| (v - mean).abs()).sum::<f64>() / count;
    Ok(rho.powf(-lattice.params().alpha()) * deviation)
}

/// Ratio of the Hölder to the Gagliardo seminorm, plus the half-ball regional
/// estimate at the attaining pair.
#[derive(Clone, Debug, Serialize)]
pub struct MorreyReport {
    pub holder: f64,
    pub gagliardo: f64,
    pub ratio: f64,
    pub argpair: (usize, usize),
    /// Gagliardo seminorm over the ball centered at the pair midpoint with
    /// radius half the pair distance.
    pub regional_gagliardo: f64,
    /// Holder quotient over `regional_gagliardo`. The continuum constant is
    /// not explicit, so this is an empirically fitted value.
    pub regional_constant: f64,
    pub regional_constant_is_fitted: bool,
}

pub fn verify_morrey_bound(u: &GridFunction, w: &KernelWeights) -> Result<MorreyReport> {
    w.check(u)?;
    if u.is_constant() {
        return Err(Error::Degenerate("constant function has vanishing seminorms".into()));
    }
    let holder = holder_seminorm(u)?;
    let gagliardo = gagliardo_seminorm(u, w)?;
    if gagliardo == 0.0 {
        return Err(Error::Degenerate("zero Gagliardo seminorm".into()));
    }
    let lattice = u.lattice();
    let (i, j) = holder.argpair;
    let (xi, xj) = (lattice.point(i), lattice.point(j));
    let mid = [0.5 * (xi[0] + xj[0]), 0.5 * (xi[1] + xj[1])];
    let p = lattice.params().p();
    let regional = regional_energy(u, w, mid, 0.5 * dist(xi, xj))?.powf(1.0 / p);
    Ok(MorreyReport {
        holder: holder.value,
        gagliardo,
        ratio: holder.value / gagliardo,
        argpair: holder.argpair,
        regional_gagliardo: regional,
        regional_constant: if regional > 0.0 { holder.value / regional } else { f64::INFINITY },
        regional_constant_is_fitted: true,
    })
}

/// Both sides of the Clarkson inequality for the discrete seminorm.
///
/// For `p ≥ 2`: `[½(u+v)]^p + [½(u−v)]^p ≤ ½([u]^p + [v]^p)`.
/// For `1 < p ≤ 2`: the same with the left powers `p/(p−1)` and the right side
/// raised to `1/(p−1)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClarksonReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `(rhs − lhs)/rhs`, or `rhs − lhs` when `rhs = 0`.
    pub relative_slack: f64,
    pub large_exponent_branch: bool,
}

pub fn clarkson_inequality(u: &GridFunction, v: &GridFunction, w: &KernelWeights) -> Result<ClarksonReport> {
    let p = w.lattice().params().p();
    let sum = u.combine(0.5, v, 0.5)?;
    let diff = u.combine(0.5, v, -0.5)?;
    let (eu, ev) = (gagliardo_energy(u, w)?, gagliardo_energy(v, w)?);
    let (es, ed) = (gagliardo_energy(&sum, w)?, gagliardo_energy(&diff, w)?);
    let (lhs, rhs, large) = if p >= 2.0 {
        (es + ed, 0.5 * (eu + ev), true)
    } else {
        let q = 1.0 / (p - 1.0);
        (es.powf(q) + ed.powf(q), (0.5 * (eu + ev)).powf(q), false)
    };
    let relative_slack = if rhs > 0.0 { (rhs - lhs) / rhs } else { rhs - lhs };
    Ok(ClarksonReport { lhs, rhs, relative_slack, large_exponent_branch: large })
}
