//! Truncated lattice discretization of ℝⁿ (n ∈ {1, 2}), grid functions with a
//! constant far-field value, and the lattice symmetries under which both
//! seminorms are invariant.
//!
//! A lattice with half-extent `L` and spacing `h` has nodes `{-L, -L+h, …, L}ⁿ`
//! enumerated in row-major order (the last axis varies fastest). Each node owns
//! the cell `x + [-h/2, h/2]ⁿ`; everything outside the union of the cells is the
//! exterior, where a grid function takes its `far_field` value.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// A point of ℝⁿ. For `n = 1` the second component is always zero.
pub type Point = [f64; 2];

const DIVISIBILITY_TOL: f64 = 1e-9;

/// The exponent triple `(n, s, p)` in the Morrey regime `s·p > n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FracParams {
    n: usize,
    s: f64,
    p: f64,
    alpha: f64,
}

impl FracParams {
    pub fn new(n: usize, s: f64, p: f64) -> Result<Self> {
        if n != 1 && n != 2 {
            return Err(Error::InvalidParameter(format!("dimension n = {n} must be 1 or 2")));
        }
        if !(s.is_finite() && s > 0.0 && s < 1.0) {
            return Err(Error::InvalidParameter(format!("fractional order s = {s} must lie in (0, 1)")));
        }
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidParameter(format!("exponent p = {p} must exceed 1")));
        }
        let sp = s * p;
        if sp <= n as f64 {
            return Err(Error::Regime { n, sp });
        }
        Ok(Self { n, s, p, alpha: s - n as f64 / p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Hölder exponent `s − n/p`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sp(&self) -> f64 {
        self.s * self.p
    }

    /// Exponent `n + s·p` of the Gagliardo kernel `|x − y|^{−(n+sp)}`.
    pub fn kernel_exponent(&self) -> f64 {
        self.n as f64 + self.sp()
    }

    /// Homogeneity degree `(s·p − n)/(p − 1)` of the barrier `|x|^β`.
    pub fn barrier_exponent(&self) -> f64 {
        (self.sp() - self.n as f64) / (self.p - 1.0)
    }

    /// Value exponent `n/p − s` of the seminorm-preserving dilation.
    pub fn dilation_exponent(&self) -> f64 {
        -self.alpha
    }
}

/// Regular grid on `[-L, L]ⁿ` with spacing `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    params: FracParams,
    half_extent: f64,
    spacing: f64,
    radius: usize,
}

fn near_integer(x: f64) -> Option<usize> {
    let r = x.round();
    if r >= 0.0 && (x - r).abs() <= DIVISIBILITY_TOL * x.abs().max(1.0) {
        Some(r as usize)
    } else {
        None
    }
}

impl Lattice {
    /// Builds the lattice. Requires `L ≥ 1` and `h` dividing both `1` and `2L`,
    /// so that the canonical pins `±eₙ` are nodes.
    pub fn build(params: FracParams, half_extent: f64, spacing: f64) -> Result<Arc<Self>> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::Geometry(format!("spacing h = {spacing} must be positive")));
        }
        if !(half_extent.is_finite() && half_extent >= 1.0 - DIVISIBILITY_TOL) {
            return Err(Error::Geometry(format!("half extent L = {half_extent} must be at least 1")));
        }
        let per_unit = near_integer(1.0 / spacing)
            .filter(|&k| k > 0)
            .ok_or_else(|| Error::Geometry(format!("h = {spacing} does not divide 1")))?;
        let radius = near_integer(half_extent / spacing)
            .ok_or_else(|| Error::Geometry(format!("h = {spacing} does not divide L = {half_extent}")))?;
        // snap to the exact dyadic/rational values implied by the integers
        let spacing = 1.0 / per_unit as f64;
        let half_extent = radius as f64 * spacing;
        Ok(Arc::new(Self { params, half_extent, spacing, radius }))
    }

    pub fn params(&self) -> &FracParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.params.n
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// `L/h`: number of nodes on each side of the origin along an axis.
    pub fn radius_index(&self) -> usize {
        self.radius
    }

    pub fn per_axis(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn len(&self) -> usize {
        self.per_axis().pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume `hⁿ` of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim() as i32)
    }

    /// Half-width of the union of cells, `L + h/2`.
    pub fn cell_half_width(&self) -> f64 {
        self.half_extent + 0.5 * self.spacing
    }

    pub fn multi_index(&self, i: usize) -> [usize; 2] {
        match self.dim() {
            1 => [i, 0],
            _ => {
                let m = self.per_axis();
                [i / m, i % m]
            }
        }
    }

    /// Integer coordinates relative to the origin, in units of `h`.
    pub fn centered(&self, i: usize) -> [i64; 2] {
        let [a, b] = self.multi_index(i);
        let k = self.radius as i64;
        match self.dim() {
            1 => [a as i64 - k, 0],
            _ => [a as i64 - k, b as i64 - k],
        }
    }

    /// Node with the given centered integer coordinates, if inside the box.
    pub fn index_centered(&self, c: [i64; 2]) -> Option<usize> {
        let k = self.radius as i64;
        let in_range = |v: i64| (-k..=k).contains(&v);
        match self.dim() {
            1 => (in_range(c[0]) && c[1] == 0).then(|| (c[0] + k) as usize),
            _ => (in_range(c[0]) && in_range(c[1]))
                .then(|| (c[0] + k) as usize * self.per_axis() + (c[1] + k) as usize),
        }
    }

    pub fn point(&self, i: usize) -> Point {
        let c = self.centered(i);
        [c[0] as f64 * self.spacing, c[1] as f64 * self.spacing]
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// Node located at `x`, which must coincide with a lattice point.
    pub fn node_at(&self, x: Point) -> Result<usize> {
        let mut c = [0i64; 2];
        for (axis, slot) in c.iter_mut().enumerate().take(self.dim()) {
            let t = x[axis] / self.spacing;
            let r = t.round();
            if (t - r).abs() > 1e-9 * t.abs().max(1.0) {
                return Err(Error::Geometry(format!("point {x:?} is not a lattice node")));
            }
            *slot = r as i64;
        }
        if self.dim() == 1 && x[1] != 0.0 {
            return Err(Error::Geometry(format!("point {x:?} has a second coordinate in 1D")));
        }
        self.index_centered(c)
            .ok_or_else(|| Error::Geometry(format!("point {x:?} lies outside the truncation box")))
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.centered(i), self.centered(j));
        let dx = (a[0] - b[0]) as f64;
        let dy = (a[1] - b[1]) as f64;
        dx.hypot(dy) * self.spacing
    }

    pub fn norm(&self, i: usize) -> f64 {
        let [x, y] = self.point(i);
        x.hypot(y)
    }

    /// Nodes at `+eₙ` and `−eₙ`.
    pub fn canonical_pins(&self) -> (usize, usize) {
        let k = (1.0 / self.spacing).round() as i64;
        let (plus, minus) = match self.dim() {
            1 => ([k, 0], [-k, 0]),
            _ => ([0, k], [0, -k]),
        };
        (
            self.index_centered(plus).expect("+e_n is a node since L >= 1"),
            self.index_centered(minus).expect("-e_n is a node since L >= 1"),
        )
    }

    /// Whether `x` lies inside the union of cells.
    pub fn contains(&self, x: Point) -> bool {
        let w = self.cell_half_width();
        x.iter().take(self.dim()).all(|c| c.abs() < w)
    }
}

/// Node values on a lattice plus one constant value used everywhere outside
/// the truncation box.
#[derive(Clone, Debug)]
pub struct GridFunction {
    lattice: Arc<Lattice>,
    values: Vec<f64>,
    far_field: f64,
}

impl GridFunction {
    pub fn new(lattice: Arc<Lattice>, values: Vec<f64>, far_field: f64) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::InvalidParameter(format!(
                "{} values for a lattice of {} nodes",
                values.len(),
                lattice.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite value at node {i}")));
        }
        if !far_field.is_finite() {
            return Err(Error::InvalidParameter("non-finite far field".into()));
        }
        Ok(Self { lattice, values, far_field })
    }

    pub fn constant(lattice: Arc<Lattice>, c: f64) -> Self {
        let values = vec![c; lattice.len()];
        Self { lattice, values, far_field: c }
    }

    pub fn from_fn(lattice: Arc<Lattice>, far_field: f64, f: impl Fn(Point) -> f64) -> Result<Self> {
        let values = lattice.points().map(f).collect();
        Self::new(lattice, values, far_field)
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable node values. Callers keep them finite.
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn far_field(&self) -> f64 {
        self.far_field
    }

    pub fn set_far_field(&mut self, value: f64) {
        self.far_field = value;
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Value at an arbitrary point: the node value on nodes, the far field
    /// outside the box.
    pub fn value_at(&self, x: Point) -> Result<f64> {
        if !self.lattice.contains(x) {
            return Ok(self.far_field);
        }
        Ok(self.values[self.lattice.node_at(x)?])
    }

    pub fn same_lattice(&self, other: &GridFunction) -> bool {
        self.same_lattice_as(&other.lattice)
    }

    pub fn same_lattice_as(&self, lattice: &Arc<Lattice>) -> bool {
        Arc::ptr_eq(&self.lattice, lattice) || *self.lattice == **lattice
    }

    /// `a·self + b·other`, far field included.
    pub fn combine(&self, a: f64, other: &GridFunction, b: f64) -> Result<GridFunction> {
        if !self.same_lattice(other) {
            return Err(Error::Mismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        GridFunction::new(self.lattice.clone(), values, a * self.far_field + b * other.far_field)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
        GridFunction::new(
            self.lattice.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
            f(self.far_field),
        )
    }

    /// Max-norm distance over nodes and far field.
    pub fn max_abs_diff(&self, other: &GridFunction) -> Result<f64> {
        if !self.same_lattice(other) {
            return Err(Error::Mismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| (x - y).abs())
            .fold((self.far_field - other.far_field).abs(), f64::max))
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|&v| v == self.far_field)
    }
}

/// Transformations of ℝⁿ that leave both seminorms unchanged, restricted to the
/// ones that map lattice nodes onto lattice nodes.
///
/// Geometric kinds act by precomposition: the transformed function is
/// `x ↦ u(T x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RigidTransform {
    Negate,
    AddConstant(f64),
    /// `u ↦ λ^{n/p−s} u(λ·)`. The image lives on the lattice `(L/λ, h/λ)`.
    Scale(f64),
    /// `u ↦ u(· + a·h)` with the integer offset `a`.
    Translate([i64; 2]),
    ReflectAxis(usize),
    /// `u ↦ u(Oᵏ ·)` with `O(x₁, x₂) = (−x₂, x₁)`; two dimensions only.
    Rotate90 { quarter_turns: u8 },
    /// `u ↦ u(x_{σ(0)}, x_{σ(1)})`.
    PermuteAxes([usize; 2]),
}

impl RigidTransform {
    pub fn inverse(&self) -> RigidTransform {
        match *self {
            RigidTransform::Negate => RigidTransform::Negate,
            RigidTransform::AddConstant(c) => RigidTransform::AddConstant(-c),
            RigidTransform::Scale(l) => RigidTransform::Scale(1.0 / l),
            RigidTransform::Translate([a, b]) => RigidTransform::Translate([-a, -b]),
            RigidTransform::ReflectAxis(k) => RigidTransform::ReflectAxis(k),
            RigidTransform::Rotate90 { quarter_turns } => {
                RigidTransform::Rotate90 { quarter_turns: (4 - quarter_turns % 4) % 4 }
            }
            RigidTransform::PermuteAxes([a, b]) => {
                let mut inv = [0usize; 2];
                inv[a] = 0;
                inv[b] = 1;
                RigidTransform::PermuteAxes(inv)
            }
        }
    }

    /// Whether the transform only permutes node values.
    pub fn is_isometry(&self) -> bool {
        matches!(
            self,
            RigidTransform::Translate(_)
                | RigidTransform::ReflectAxis(_)
                | RigidTransform::Rotate90 { .. }
                | RigidTransform::PermuteAxes(_)
        )
    }

    /// Image of centered integer coordinates under the geometric part.
    fn map_centered(&self, c: [i64; 2]) -> [i64; 2] {
        match *self {
            RigidTransform::Translate([a, b]) => [c[0] + a, c[1] + b],
            RigidTransform::ReflectAxis(k) => {
                let mut out = c;
                out[k] = -out[k];
                out
            }
            RigidTransform::Rotate90 { quarter_turns } => {
                let mut out = c;
                for _ in 0..quarter_turns % 4 {
                    out = [-out[1], out[0]];
                }
                out
            }
            RigidTransform::PermuteAxes(sigma) => [c[sigma[0]], c[sigma[1]]],
            _ => c,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match *self {
            RigidTransform::Negate => Ok(()),
            RigidTransform::AddConstant(c) if c.is_finite() => Ok(()),
            RigidTransform::AddConstant(c) => Err(Error::InvalidParameter(format!("constant {c}"))),
            RigidTransform::Scale(l) if l.is_finite() && l > 0.0 => Ok(()),
            RigidTransform::Scale(l) => Err(Error::InvalidParameter(format!("scale factor {l} must be positive"))),
            RigidTransform::Translate([_, b]) if n == 1 && b != 0 => {
                Err(Error::Geometry("translation has a second component in 1D".into()))
            }
            RigidTransform::Translate(_) => Ok(()),
            RigidTransform::ReflectAxis(k) if k < n => Ok(()),
            RigidTransform::ReflectAxis(k) => Err(Error::Geometry(format!("no axis {k} in dimension {n}"))),
            RigidTransform::Rotate90 { quarter_turns } if n == 2 || quarter_turns % 4 == 0 => Ok(()),
            RigidTransform::Rotate90 { .. } => Err(Error::Geometry("rotations need two dimensions".into())),
            RigidTransform::PermuteAxes(sigma) => {
                let ok = match n {
                    1 => sigma == [0, 1],
                    _ => sigma == [0, 1] || sigma == [1, 0],
                };
                if ok {
                    Ok(())
                } else {
                    Err(Error::Geometry(format!("{sigma:?} is not a permutation of the axes")))
                }
            }
        }
    }
}

/// Applies `t` to `u`. Far field: negated under [`RigidTransform::Negate`],
/// shifted under [`RigidTransform::AddConstant`], rescaled under
/// [`RigidTransform::Scale`], unchanged under isometries. Translated nodes whose
/// source lies outside the box take the far-field value.
pub fn apply_transform(u: &GridFunction, t: &RigidTransform) -> Result<GridFunction> {
    let lattice = u.lattice();
    t.validate(lattice.dim())?;
    match *t {
        RigidTransform::Negate => u.map(|v| -v),
        RigidTransform::AddConstant(c) => u.map(|v| v + c),
        RigidTransform::Scale(lambda) => {
            let image = Lattice::build(
                *lattice.params(),
                lattice.half_extent() / lambda,
                lattice.spacing() / lambda,
            )?;
            if image.per_axis() != lattice.per_axis() {
                return Err(Error::Geometry(format!("scaling by {lambda} does not map nodes onto nodes")));
            }
            let factor = lambda.powf(lattice.params().dilation_exponent());
            GridFunction::new(
                image,
                u.values().iter().map(|v| factor * v).collect(),
                factor * u.far_field(),
            )
        }
        _ => {
            let values = (0..lattice.len())
                .map(|i| {
                    let source = t.map_centered(lattice.centered(i));
                    lattice.index_centered(source).map_or(u.far_field(), |j| u.value(j))
                })
                .collect();
            GridFunction::new(lattice.clone(), values, u.far_field())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, s: f64, p: f64) -> FracParams {
        FracParams::new(n, s, p).unwrap()
    }

    #[test]
    fn node_counts() {
        let l = Lattice::build(params(1, 0.8, 2.0), 4.0, 0.5).unwrap();
        assert_eq!(l.len(), 17);
        let xs: Vec<f64> = l.points().map(|p| p[0]).collect();
        assert_eq!(xs.first(), Some(&-4.0));
        assert_eq!(xs[1], -3.5);
        assert_eq!(xs.last(), Some(&4.0));

        let l2 = Lattice::build(params(2, 0.9, 4.0), 2.0, 1.0).unwrap();
        assert_eq!(l2.len(), 25);
        assert_eq!(l2.point(0), [-2.0, -2.0]);
        assert_eq!(l2.point(1), [-2.0, -1.0]);
        assert_eq!(l2.point(24), [2.0, 2.0]);
    }

    #[test]
    fn regime_is_enforced() {
        assert!(matches!(FracParams::new(1, 0.4, 2.0), Err(Error::Regime { .. })));
        assert!(matches!(FracParams::new(2, 0.9, 2.0), Err(Error::Regime { .. })));
        assert!(matches!(FracParams::new(3, 0.9, 9.0), Err(Error::InvalidParameter(_))));
        let p = params(1, 0.8, 2.0);
        assert!((p.alpha() - 0.3).abs() < 1e-15);
        assert!(p.alpha() > 0.0 && p.alpha() < 1.0);
    }

    #[test]
    fn geometry_is_validated() {
        let p = params(1, 0.8, 2.0);
        assert!(matches!(Lattice::build(p, 0.5, 0.25), Err(Error::Geometry(_))));
        assert!(matches!(Lattice::build(p, 4.0, 0.3), Err(Error::Geometry(_))));
        assert!(matches!(Lattice::build(p, 4.1, 0.25), Err(Error::Geometry(_))));
        assert!(matches!(Lattice::build(p, 4.0, -1.0), Err(Error::Geometry(_))));
        assert!(Lattice::build(p, 1.0, 1.0).is_ok());
    }

    #[test]
    fn index_maps_are_inverse() {
        for n in [1, 2] {
            let l = Lattice::build(params(n, 0.9, 4.0), 2.0, 0.5).unwrap();
            for i in 0..l.len() {
                assert_eq!(l.index_centered(l.centered(i)), Some(i));
                assert_eq!(l.node_at(l.point(i)).unwrap(), i);
            }
        }
    }

    #[test]
    fn canonical_pins_are_unit_vectors() {
        let l = Lattice::build(params(2, 0.9, 4.0), 2.0, 0.25).unwrap();
        let (plus, minus) = l.canonical_pins();
        assert_eq!(l.point(plus), [0.0, 1.0]);
        assert_eq!(l.point(minus), [0.0, -1.0]);
        let l1 = Lattice::build(params(1, 0.8, 2.0), 2.0, 0.25).unwrap();
        let (plus, minus) = l1.canonical_pins();
        assert_eq!(l1.point(plus), [1.0, 0.0]);
        assert_eq!(l1.point(minus), [-1.0, 0.0]);
    }

    #[test]
    fn negate_constant() {
        let l = Lattice::build(params(1, 0.8, 2.0), 2.0, 0.5).unwrap();
        let u = GridFunction::constant(l, 1.0);
        let v = apply_transform(&u, &RigidTransform::Negate).unwrap();
        assert!(v.values().iter().all(|&x| x == -1.0));
        assert_eq!(v.far_field(), -1.0);
    }

    #[test]
    fn reflecting_an_odd_hat_negates_it() {
        let l = Lattice::build(params(1, 0.8, 2.0), 2.0, 0.25).unwrap();
        let hat = |x: f64| (1.0 - (x.abs() - 1.0).abs()).max(0.0);
        let u = GridFunction::from_fn(l, 0.0, |x| x[0].signum() * hat(x[0])).unwrap();
        let v = apply_transform(&u, &RigidTransform::ReflectAxis(0)).unwrap();
        for (a, b) in u.values().iter().zip(v.values()) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn scale_uses_dilation_exponent() {
        let l = Lattice::build(params(1, 0.8, 2.0), 4.0, 0.25).unwrap();
        let u = GridFunction::from_fn(l, 0.5, |x| x[0]).unwrap();
        let v = apply_transform(&u, &RigidTransform::Scale(2.0)).unwrap();
        let factor = 2f64.powf(-0.3);
        assert!((v.lattice().half_extent() - 2.0).abs() < 1e-15);
        assert!((v.lattice().spacing() - 0.125).abs() < 1e-15);
        for (a, b) in u.values().iter().zip(v.values()) {
            assert!((b - factor * a).abs() < 1e-15);
        }
        assert!((v.far_field() - 0.5 * factor).abs() < 1e-15);
        // L/λ < 1 is not constructible
        assert!(matches!(apply_transform(&u, &RigidTransform::Scale(8.0)), Err(Error::Geometry(_))));
    }

    #[test]
    fn translation_fills_from_far_field() {
        let l = Lattice::build(params(1, 0.8, 2.0), 1.0, 0.5).unwrap();
        let u = GridFunction::new(l, vec![1.0, 2.0, 3.0, 4.0, 5.0], 9.0).unwrap();
        let v = apply_transform(&u, &RigidTransform::Translate([1, 0])).unwrap();
        assert_eq!(v.values(), &[2.0, 3.0, 4.0, 5.0, 9.0]);
    }

    #[test]
    fn rotation_in_2d() {
        let l = Lattice::build(params(2, 0.9, 4.0), 1.0, 1.0).unwrap();
        let u = GridFunction::from_fn(l.clone(), 0.0, |x| x[0] + 10.0 * x[1]).unwrap();
        let v = apply_transform(&u, &RigidTransform::Rotate90 { quarter_turns: 1 }).unwrap();
        // v(x1, x2) = u(-x2, x1) = -x2 + 10 x1
        for i in 0..l.len() {
            let [x1, x2] = l.point(i);
            assert_eq!(v.value(i), -x2 + 10.0 * x1);
        }
        assert!(apply_transform(&u, &RigidTransform::ReflectAxis(2)).is_err());
    }

    #[test]
    fn isometries_invert_exactly() {
        let l = Lattice::build(params(2, 0.9, 4.0), 2.0, 0.5).unwrap();
        let u = GridFunction::from_fn(l, 0.0, |x| (3.0 * x[0]).sin() + x[1] * x[1]).unwrap();
        let kinds = [
            RigidTransform::Negate,
            RigidTransform::ReflectAxis(0),
            RigidTransform::ReflectAxis(1),
            RigidTransform::Rotate90 { quarter_turns: 1 },
            RigidTransform::Rotate90 { quarter_turns: 3 },
            RigidTransform::PermuteAxes([1, 0]),
        ];
        for t in kinds {
            let back = apply_transform(&apply_transform(&u, &t).unwrap(), &t.inverse()).unwrap();
            assert_eq!(back.values(), u.values(), "{t:?}");
        }
    }

    #[test]
    fn value_at_outside_is_far_field() {
        let l = Lattice::build(params(1, 0.8, 2.0), 1.0, 0.5).unwrap();
        let u = GridFunction::new(l, vec![1.0, 2.0, 3.0, 4.0, 5.0], -7.0).unwrap();
        assert_eq!(u.value_at([5.0, 0.0]).unwrap(), -7.0);
        assert_eq!(u.value_at([0.5, 0.0]).unwrap(), 4.0);
        assert!(u.value_at([0.3, 0.0]).is_err());
    }
}
