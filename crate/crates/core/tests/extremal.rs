use std::sync::Arc;

use morrey_core::extremal::{
    estimate_sharp_constant, solve_extremal, solve_extremal_with, verify_pointwise_bounds, verify_stability, verify_symmetries,
    verify_uniqueness, ExtremalOptions, InitialGuess, PinSpec, StabilityOptions,
};
use morrey_core::operator::{annulus_nodes, euler_lagrange_residual, verify_barrier_harmonicity};
use morrey_core::perron::{run_decay_experiment, verify_half_space_sign};
use morrey_core::seminorm::{gagliardo_seminorm, verify_morrey_bound, KernelWeights};
use morrey_core::solver::SolverOptions;
use morrey_core::{apply_transform, Error, FracParams, GridFunction, Lattice, RigidTransform};

fn setup(n: usize, s: f64, p: f64, l: f64, h: f64) -> (Arc<Lattice>, KernelWeights) {
    let lat = Lattice::build(FracParams::new(n, s, p).unwrap(), l, h).unwrap();
    let w = KernelWeights::build(&lat);
    (lat, w)
}

fn opts(tol: f64) -> ExtremalOptions {
    ExtremalOptions { solver: SolverOptions { tol, ..SolverOptions::default() }, ..ExtremalOptions::default() }
}

#[test]
fn extremal_is_stationary_with_balanced_pins() {
    for (n, s, p, l) in [(1, 0.8, 2.0, 4.0), (1, 0.8, 1.5, 4.0), (1, 0.8, 3.0, 4.0), (2, 0.9, 4.0, 2.0)] {
        let (lat, w) = setup(n, s, p, l, 0.25);
        let res = solve_extremal(&w, PinSpec::canonical(&lat), 1e-9, 100_000).unwrap();
        let el = euler_lagrange_residual(&res, &w).unwrap();
        assert!(el.max_abs <= 1e-7, "n={n} p={p}: {}", el.max_abs);
        assert!(el.pin_mass_imbalance.unwrap() <= 1e-6);
        let [m0, m1] = el.pin_masses.unwrap();
        assert!(m0 > 0.0 && m1 < 0.0);
    }
}

#[test]
fn perturbing_the_extremal_raises_the_residual() {
    let (lat, w) = setup(1, 0.8, 2.0, 4.0, 0.25);
    let res = solve_extremal(&w, PinSpec::canonical(&lat), 1e-9, 100_000).unwrap();
    let base = euler_lagrange_residual(&res, &w).unwrap().max_abs;
    let mut bumped = res.clone();
    for (k, v) in bumped.u.values_mut().iter_mut().enumerate() {
        if k != res.pins.x0 && k != res.pins.y0 {
            *v += 1e-2 * ((k * 7919) % 13) as f64 / 13.0;
        }
    }
    assert!(euler_lagrange_residual(&bumped, &w).unwrap().max_abs > base);
}

#[test]
fn pins_and_tolerance_are_validated() {
    let (lat, w) = setup(1, 0.8, 2.0, 1.0, 0.5);
    assert!(PinSpec::new(&lat, 1, 1, 1.0, -1.0).is_err());
    assert!(PinSpec::new(&lat, 0, 1, 1.0, 1.0).is_err());
    assert!(PinSpec::new(&lat, 0, 99, 1.0, -1.0).is_err());
    let err = solve_extremal(&w, PinSpec::canonical(&lat), 1e-12, 1).unwrap_err();
    assert!(matches!(err, Error::NonConvergence { .. }));
}

#[test]
fn extremal_from_distinct_seeds_agrees() {
    let (lat, w) = setup(1, 0.8, 3.0, 4.0, 0.25);
    let pins = PinSpec::canonical(&lat);
    let wobble: Vec<f64> = (0..lat.len()).map(|k| ((k * 31) % 17) as f64 / 8.5 - 1.0).collect();
    let seeds = [InitialGuess::Midpoint, InitialGuess::LinearInterpolant, InitialGuess::Custom(wobble)];
    let report = verify_uniqueness(&w, pins, &seeds, &opts(1e-9)).unwrap();
    assert!(report.pass, "{report:?}");
    assert!(report.max_gap <= 1e-7);
    assert!(report.convexity_gap >= -1e-12);
}

#[test]
fn two_dimensional_extremal_is_symmetric_and_bounded() {
    let (lat, w) = setup(2, 0.9, 4.0, 2.0, 0.25);
    let res = solve_extremal(&w, PinSpec::canonical(&lat), 1e-9, 100_000).unwrap();
    let sym = verify_symmetries(&res, 1e-7).unwrap();
    assert!(sym.pass, "{sym:?}");
    assert!(sym.axis_defect.is_some());
    let bounds = verify_pointwise_bounds(&res, 0.0).unwrap();
    assert!(bounds.pass, "{bounds:?}");
    let sign = verify_half_space_sign(&res, 1e-6).unwrap();
    assert!(sign.pass, "{sign:?}");
    let decay = run_decay_experiment(&res, &[1.25, 1.5, 2.0]).unwrap();
    assert!(decay.strictly_decreasing, "{decay:?}");
}

#[test]
fn one_dimensional_symmetry_has_no_axis_check() {
    let (lat, w) = setup(1, 0.8, 1.5, 2.0, 0.25);
    let res = solve_extremal(&w, PinSpec::canonical(&lat), 1e-10, 100_000).unwrap();
    let sym = verify_symmetries(&res, 1e-7).unwrap();
    assert!(sym.axis_defect.is_none());
    assert!(sym.pass);
    let off = PinSpec::new(&lat, 0, 3, 1.0, -1.0).unwrap();
    let res = solve_extremal(&w, off, 1e-8, 100_000).unwrap();
    assert!(matches!(verify_symmetries(&res, 1e-7), Err(Error::Precondition(_))));
}

#[test]
fn value_map_carries_extremals() {
    let (lat, w) = setup(1, 0.8, 3.0, 4.0, 0.25);
    let base = solve_extremal(&w, PinSpec::canonical(&lat), 1e-10, 100_000).unwrap();
    let (c, d) = (2.5, -0.75);
    let pins = PinSpec { a: c + d, b: -c + d, ..PinSpec::canonical(&lat) };
    let direct = solve_extremal(&w, pins, 1e-10, 100_000).unwrap();
    let mapped = base.u.map(|v| c * v + d).unwrap();
    // gradient tolerance scales like c^{p−1}
    assert!(mapped.max_abs_diff(&direct.u).unwrap() <= 1e-8);
    assert!((base.c_star_hat - direct.c_star_hat).abs() <= 1e-8 * base.c_star_hat);
}

#[test]
fn sharp_constant_ignores_transforms() {
    let (lat, w) = setup(2, 0.9, 4.0, 2.0, 0.25);
    let base = solve_extremal(&w, PinSpec::canonical(&lat), 1e-9, 100_000).unwrap();
    let c = estimate_sharp_constant(&base).unwrap();
    // rotating the pin axis by a quarter turn
    let i = lat.index_centered([4, 0]).unwrap();
    let j = lat.index_centered([-4, 0]).unwrap();
    let turned = solve_extremal(&w, PinSpec::new(&lat, i, j, 1.0, -1.0).unwrap(), 1e-9, 100_000).unwrap();
    assert!((turned.c_star_hat - c).abs() <= 1e-6 * c);
    let rotated = apply_transform(&base.u, &RigidTransform::Rotate90 { quarter_turns: 1 }).unwrap();
    assert!(rotated.max_abs_diff(&turned.u).unwrap() <= 1e-6);
    // swapping pin values negates around the midpoint
    let swapped = solve_extremal(&w, PinSpec { a: -1.0, b: 1.0, ..base.pins }, 1e-9, 100_000).unwrap();
    assert!((swapped.c_star_hat - c).abs() <= 1e-6 * c);
    let neg = apply_transform(&base.u, &RigidTransform::Negate).unwrap();
    assert!(neg.max_abs_diff(&swapped.u).unwrap() <= 1e-6);
}

#[test]
fn random_functions_respect_the_sharp_constant() {
    use morrey_core::sampling::{sample, stream, ALL_FAMILIES};
    let (lat, w) = setup(1, 0.8, 2.0, 4.0, 0.25);
    let res = solve_extremal(&w, PinSpec::canonical(&lat), 1e-10, 100_000).unwrap();
    let mut rng = stream(3, 0);
    for k in 0..60 {
        let family = ALL_FAMILIES[k % ALL_FAMILIES.len()];
        let u = sample(&lat, family, Some(&res.u), &mut rng).unwrap();
        if u.is_constant() {
            continue;
        }
        let report = verify_morrey_bound(&u, &w).unwrap();
        assert!(report.ratio <= res.c_star_hat * 1.02, "{family:?}: {}", report.ratio / res.c_star_hat);
        assert!(report.regional_constant_is_fitted);
        assert!(report.regional_gagliardo <= report.gagliardo * (1.0 + 1e-12));
    }
}

#[test]
fn constant_input_is_degenerate() {
    let (lat, w) = setup(1, 0.8, 2.0, 1.0, 0.25);
    let u = GridFunction::constant(lat.clone(), 3.0);
    assert!(matches!(verify_morrey_bound(&u, &w), Err(Error::Degenerate(_))));
    assert_eq!(gagliardo_seminorm(&u, &w).unwrap(), 0.0);
}

#[test]
fn stability_holds_on_both_branches() {
    for p in [1.5, 3.0] {
        let (lat, w) = setup(1, 0.8, p, 2.0, 0.25);
        let res = solve_extremal(&w, PinSpec::canonical(&lat), 1e-10, 100_000).unwrap();
        let bump = GridFunction::from_fn(lat.clone(), 0.0, |x| 0.05 * (-4.0 * x[0] * x[0]).exp()).unwrap();
        let v = res.u.combine(1.0, &bump, 1.0).unwrap();
        let report = verify_stability(&res, &v, &w, &StabilityOptions::default()).unwrap();
        assert!(report.residual >= -1e-8, "{report:?}");
        assert_eq!(report.large_exponent_branch, p >= 2.0);
        // the extremal itself sits on the equality case
        let eq = verify_stability(&res, &res.u, &w, &StabilityOptions::default()).unwrap();
        assert!(eq.residual.abs() <= 1e-6, "{eq:?}");
        assert!(eq.residual <= report.residual + 1e-12);
    }
}

#[test]
fn free_far_field_settles_at_the_midpoint() {
    let (lat, w) = setup(1, 0.8, 2.0, 4.0, 0.25);
    let pins = PinSpec { a: 2.0, b: 0.0, ..PinSpec::canonical(&lat) };
    let res = solve_extremal_with(&w, pins, &ExtremalOptions { free_far_field: true, ..opts(1e-10) }).unwrap();
    assert!((res.u.far_field() - 1.0).abs() < 1e-9);
    assert!(res.free_far_field);
}

#[test]
fn barrier_residual_shrinks_with_resolution_in_one_dimension() {
    let residual = |l: f64, h: f64| {
        let (lat, w) = setup(1, 0.8, 2.0, l, h);
        verify_barrier_harmonicity(&w, &annulus_nodes(&lat, 1.0, 2.0)).unwrap().max_abs
    };
    let coarse = residual(4.0, 0.25);
    let fine = residual(8.0, 0.125);
    assert!(coarse / fine >= 1.5, "{coarse} -> {fine}");
}

#[test]
fn barrier_rejects_nodes_near_the_pole() {
    let (lat, w) = setup(1, 0.8, 2.0, 2.0, 0.25);
    let origin = lat.node_at([0.0, 0.0]).unwrap();
    assert!(matches!(verify_barrier_harmonicity(&w, &[origin]), Err(Error::Geometry(_))));
    let near = lat.node_at([0.25, 0.0]).unwrap();
    assert!(matches!(verify_barrier_harmonicity(&w, &[near]), Err(Error::Precondition(_))));
}
