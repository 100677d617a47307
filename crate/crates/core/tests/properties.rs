//! Randomized invariants of the seminorms, the operator and the solvers.

use std::sync::Arc;

use morrey_core::operator::{frac_p_laplacian, j_p};
use morrey_core::perron::{dirichlet_options, solve_dirichlet, solve_dirichlet_with, ComplementData};
use morrey_core::seminorm::{clarkson_inequality, gagliardo_energy, gagliardo_seminorm, holder_seminorm, KernelWeights};
use morrey_core::solver::{minimize, Optimizer, Problem, SolverOptions};
use morrey_core::{apply_transform, FracParams, GridFunction, Lattice, RigidTransform};
use proptest::prelude::*;

fn lattice(n: usize, s: f64, p: f64, l: f64, h: f64) -> Arc<Lattice> {
    Lattice::build(FracParams::new(n, s, p).unwrap(), l, h).unwrap()
}

/// Small lattices in both dimensions with exponents on either side of 2.
fn setup() -> impl Strategy<Value = (Arc<Lattice>, KernelWeights)> {
    prop_oneof![
        Just((1usize, 0.8, 1.5)),
        Just((1, 0.8, 2.0)),
        Just((1, 0.8, 3.0)),
        Just((2, 0.9, 4.0)),
        Just((2, 0.75, 3.0)),
    ]
    .prop_map(|(n, s, p)| {
        let l = if n == 1 { lattice(n, s, p, 2.0, 0.25) } else { lattice(n, s, p, 1.0, 0.25) };
        let w = KernelWeights::build(&l);
        (l, w)
    })
}

fn function(l: &Arc<Lattice>, values: &[f64]) -> GridFunction {
    let v = values.iter().cycle().take(l.len() + 1).copied().collect::<Vec<_>>();
    GridFunction::new(l.clone(), v[..l.len()].to_vec(), v[l.len()]).unwrap()
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 82)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn energy_is_convex((l, w) in setup(), a in values(), b in values(), theta in 0.0f64..1.0) {
        let (u, v) = (function(&l, &a), function(&l, &b));
        let mix = u.combine(theta, &v, 1.0 - theta).unwrap();
        let lhs = gagliardo_energy(&mix, &w).unwrap();
        let rhs = theta * gagliardo_energy(&u, &w).unwrap() + (1.0 - theta) * gagliardo_energy(&v, &w).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-10));
    }

    #[test]
    fn clarkson_holds((l, w) in setup(), a in values(), b in values()) {
        let report = clarkson_inequality(&function(&l, &a), &function(&l, &b), &w).unwrap();
        prop_assert!(report.relative_slack >= -1e-10, "{report:?}");
        prop_assert_eq!(report.large_exponent_branch, l.params().p() >= 2.0);
    }

    #[test]
    fn triangle_inequality((l, w) in setup(), a in values(), b in values()) {
        let (u, v) = (function(&l, &a), function(&l, &b));
        let sum = u.combine(1.0, &v, 1.0).unwrap();
        let g = |f: &GridFunction| gagliardo_seminorm(f, &w).unwrap();
        prop_assert!(g(&sum) <= (g(&u) + g(&v)) * (1.0 + 1e-12));
        let c = |f: &GridFunction| holder_seminorm(f).unwrap().value;
        prop_assert!(c(&sum) <= (c(&u) + c(&v)) * (1.0 + 1e-12));
    }

    #[test]
    fn seminorms_are_invariant((l, w) in setup(), a in values(), c in -5.0f64..5.0, k in 0usize..6) {
        let u = function(&l, &a);
        let t = match k {
            0 => RigidTransform::Negate,
            1 => RigidTransform::AddConstant(c),
            2 => RigidTransform::ReflectAxis(l.dim() - 1),
            3 if l.dim() == 2 => RigidTransform::Rotate90 { quarter_turns: 1 + (c.abs() as u8) % 3 },
            4 if l.dim() == 2 => RigidTransform::PermuteAxes([1, 0]),
            _ => RigidTransform::ReflectAxis(0),
        };
        let v = apply_transform(&u, &t).unwrap();
        prop_assert!(rel(gagliardo_seminorm(&u, &w).unwrap(), gagliardo_seminorm(&v, &w).unwrap()) <= 1e-12);
        prop_assert!(rel(holder_seminorm(&u).unwrap().value, holder_seminorm(&v).unwrap().value) <= 1e-12);
    }

    #[test]
    fn translation_preserves_seminorms_of_padded_functions((l, w) in setup(), a in values(), k in -2i64..=2) {
        // a function equal to its far field near the boundary keeps all its mass inside the box
        let r = l.radius_index() as i64;
        let far = a[0];
        let values = (0..l.len())
            .map(|i| {
                let c = l.centered(i);
                if c[0].abs() > r - 3 || c[1].abs() > r - 3 { far } else { a[i % a.len()] }
            })
            .collect();
        let u = GridFunction::new(l.clone(), values, far).unwrap();
        let shift = if l.dim() == 2 { [k, -k] } else { [k, 0] };
        let v = apply_transform(&u, &RigidTransform::Translate(shift)).unwrap();
        // the coupling to the truncated exterior moves with the box, not with the function
        prop_assert!(rel(gagliardo_seminorm(&u, &w).unwrap(), gagliardo_seminorm(&v, &w).unwrap()) <= 1e-3);
        prop_assert!(rel(holder_seminorm(&u).unwrap().value, holder_seminorm(&v).unwrap().value) <= 1e-12);
    }

    #[test]
    fn transforms_invert((l, _w) in setup(), a in values(), c in -5.0f64..5.0, k in 0usize..5) {
        let u = function(&l, &a);
        let t = match k {
            0 => RigidTransform::Negate,
            1 => RigidTransform::ReflectAxis(0),
            2 if l.dim() == 2 => RigidTransform::Rotate90 { quarter_turns: 3 },
            3 if l.dim() == 2 => RigidTransform::PermuteAxes([1, 0]),
            _ => RigidTransform::Translate([1, 0]),
        };
        let back = apply_transform(&apply_transform(&u, &t).unwrap(), &t.inverse()).unwrap();
        if matches!(t, RigidTransform::Translate(_)) {
            // nodes shifted out and back in pick up the far field
            let r = l.radius_index() as i64;
            for i in 0..l.len() {
                if l.centered(i)[0] > -r {
                    prop_assert_eq!(back.value(i), u.value(i));
                }
            }
        } else {
            prop_assert_eq!(back.values(), u.values());
            prop_assert_eq!(back.far_field(), u.far_field());
        }
        let shifted = apply_transform(&apply_transform(&u, &RigidTransform::AddConstant(c)).unwrap(), &RigidTransform::AddConstant(-c)).unwrap();
        prop_assert!(shifted.max_abs_diff(&u).unwrap() <= 4.0 * f64::EPSILON * (c.abs() + 2.0));
    }

    #[test]
    fn holder_argpair_ignores_constants((_l, _w) in setup(), a in values(), c in -5.0f64..5.0) {
        let l = lattice(1, 0.8, 2.0, 2.0, 0.25);
        let u = function(&l, &a);
        let hu = holder_seminorm(&u).unwrap();
        let hn = holder_seminorm(&apply_transform(&u, &RigidTransform::Negate).unwrap()).unwrap();
        prop_assert_eq!(hu, hn);
        let hc = holder_seminorm(&u.map(|v| v + c).unwrap()).unwrap();
        prop_assert!(rel(hu.value, hc.value) <= 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences((l, w) in setup(), a in values(), node in 0usize..81) {
        let u = function(&l, &a);
        let k = node % l.len();
        let p = l.params().p();
        let step = 1e-6;
        let bump = |d: f64| {
            let mut v = u.clone();
            v.values_mut()[k] += d;
            gagliardo_energy(&v, &w).unwrap()
        };
        let fd = (bump(step) - bump(-step)) / (2.0 * step);
        let analytic = 2.0 * p * l.cell_volume() * frac_p_laplacian(&u, &w, k).unwrap();
        prop_assert!((fd - analytic).abs() <= 1e-6 * analytic.abs().max(1e-3), "{fd} vs {analytic}");
    }

    #[test]
    fn constants_have_zero_operator((l, w) in setup(), c in -3.0f64..3.0) {
        let u = GridFunction::constant(l.clone(), c);
        for k in 0..l.len() {
            prop_assert_eq!(frac_p_laplacian(&u, &w, k).unwrap(), 0.0);
        }
    }

    #[test]
    fn j_p_is_odd_and_monotone(a in -10.0f64..10.0, b in -10.0f64..10.0, p in 1.05f64..6.0) {
        prop_assert_eq!(j_p(-a, p), -j_p(a, p));
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(j_p(lo, p) <= j_p(hi, p));
    }
}

fn interval_data(l: &Arc<Lattice>, left: f64, right: f64, far: f64) -> ComplementData {
    let n = l.len();
    let mut free = vec![true; n];
    let mut g = vec![0.0; n];
    for i in 0..n {
        let x = l.point(i)[0];
        if x <= -1.0 {
            free[i] = false;
            g[i] = left;
        } else if x >= 1.0 {
            free[i] = false;
            g[i] = right + 0.1 * x;
        }
    }
    ComplementData::new(l.clone(), free, g, far).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn comparison_principle(p in prop_oneof![Just(1.5), Just(2.0), Just(3.0)], a in -1.0f64..1.0, b in -1.0f64..1.0, d in 0.0f64..0.5) {
        let l = lattice(1, 0.8, p, 2.0, 0.25);
        let w = KernelWeights::build(&l);
        let lower = solve_dirichlet(&w, &interval_data(&l, a, b, 0.0), 1e-11, 100_000).unwrap();
        let upper = solve_dirichlet(&w, &interval_data(&l, a + d, b + 0.5 * d, d), 1e-11, 100_000).unwrap();
        for i in 0..l.len() {
            prop_assert!(lower.value(i) <= upper.value(i) + 1e-9);
        }
    }

    #[test]
    fn dirichlet_solution_is_a_fixed_point(p in prop_oneof![Just(1.5), Just(3.0)], a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let l = lattice(1, 0.8, p, 2.0, 0.25);
        let w = KernelWeights::build(&l);
        let data = interval_data(&l, a, b, 0.5 * (a + b));
        let u = solve_dirichlet(&w, &data, 1e-10, 100_000).unwrap();
        let again = ComplementData::new(l.clone(), data.free.clone(), u.values().to_vec(), data.far_field).unwrap();
        let (v, out) = solve_dirichlet_with(&w, &again, &dirichlet_options(1e-10, 100_000)).unwrap();
        prop_assert!(out.iterations <= 1, "{} sweeps", out.iterations);
        prop_assert!(v.max_abs_diff(&u).unwrap() <= 1e-9);
    }

    #[test]
    fn solver_energy_never_increases(p in prop_oneof![Just(1.5), Just(2.0), Just(3.0)], opt in 0usize..4, seed in any::<u64>()) {
        let l = lattice(1, 0.8, p, 2.0, 0.25);
        let w = KernelWeights::build(&l);
        let mut fixed = vec![false; l.len()];
        let (x0, y0) = l.canonical_pins();
        fixed[x0] = true;
        fixed[y0] = true;
        let init: Vec<f64> = (0..l.len()).map(|i| ((i as u64).wrapping_mul(seed | 1) % 97) as f64 / 48.0 - 1.0).collect();
        let optimizer = [Optimizer::Lbfgs, Optimizer::GradientDescent, Optimizer::GaussSeidel, Optimizer::Jacobi][opt];
        let opts = SolverOptions { tol: 1e-9, optimizer, record_history: true, max_iter: 20_000, ..SolverOptions::default() };
        let out = minimize(&Problem { weights: &w, fixed, free_far_field: false }, init, 0.0, &opts);
        prop_assert!(out.converged);
        for pair in out.energy_history.windows(2) {
            prop_assert!(pair[1] <= pair[0] * (1.0 + 1e-14), "{} -> {}", pair[0], pair[1]);
        }
    }
}

#[test]
fn jacobi_and_gauss_seidel_agree() {
    for p in [1.5, 2.0, 3.0] {
        let l = lattice(1, 0.8, p, 2.0, 0.25);
        let w = KernelWeights::build(&l);
        let data = interval_data(&l, -1.0, 1.0, 0.0);
        let gs = solve_dirichlet(&w, &data, 1e-10, 100_000).unwrap();
        let opts = SolverOptions { optimizer: Optimizer::Jacobi, ..dirichlet_options(1e-10, 100_000) };
        let (jac, _) = solve_dirichlet_with(&w, &data, &opts).unwrap();
        assert!(gs.max_abs_diff(&jac).unwrap() < 1e-8, "p={p}");
    }
}

#[test]
fn translation_defect_vanishes_under_refinement() {
    let defect = |n: usize, l: f64, h: f64| {
        let lat = if n == 1 { lattice(1, 0.8, 2.0, l, h) } else { lattice(2, 0.9, 4.0, l, h) };
        let w = KernelWeights::build(&lat);
        let u = GridFunction::from_fn(lat.clone(), 0.0, |x| (-16.0 * (x[0] * x[0] + x[1] * x[1])).exp()).unwrap();
        let v = apply_transform(&u, &RigidTransform::Translate([2, 0])).unwrap();
        rel(gagliardo_seminorm(&u, &w).unwrap(), gagliardo_seminorm(&v, &w).unwrap())
    };
    for n in [1, 2] {
        let coarse = defect(n, 1.0, 0.25);
        assert!(coarse < 1e-3, "n={n}: {coarse}");
        assert!(defect(n, 1.0, 0.125) < coarse / 4.0);
        assert!(defect(n, 2.0, 0.25) < coarse / 4.0);
    }
}

#[test]
fn scaling_is_exact_on_matched_lattices() {
    // homogeneity of the kernel carries over to the weights and the exterior integrals
    for (n, s, p, h) in [(1, 0.8, 2.0, 0.25), (1, 0.8, 3.0, 0.125), (2, 0.9, 4.0, 0.25)] {
        let fine = lattice(n, s, p, 2.0, h);
        let u = GridFunction::from_fn(fine.clone(), 0.1, |x| (-x[0] * x[0] - 0.5 * x[1]).exp()).unwrap();
        let v = apply_transform(&u, &RigidTransform::Scale(2.0)).unwrap();
        assert_eq!(v.lattice().spacing(), h / 2.0);
        let factor = 2f64.powf(n as f64 / p - s);
        assert!((v.value(3) / u.value(3) - factor).abs() < 1e-15);
        let gu = gagliardo_seminorm(&u, &KernelWeights::build(&fine)).unwrap();
        let gv = gagliardo_seminorm(&v, &KernelWeights::build(v.lattice())).unwrap();
        assert!(rel(gu, gv) < 1e-12, "n={n}: {gu} vs {gv}");
        assert_eq!(holder_seminorm(&v).unwrap().argpair, holder_seminorm(&u).unwrap().argpair);
    }
}
