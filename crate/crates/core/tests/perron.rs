use std::sync::Arc;

use morrey_core::io;
use morrey_core::perron::{
    decay_study, dirichlet_options, run_slit_experiment, slit_data, solve_dirichlet, solve_dirichlet_with, verify_barrier_bound,
    ComplementData,
};
use morrey_core::extremal::ExtremalOptions;
use morrey_core::seminorm::KernelWeights;
use morrey_core::solver::{Optimizer, SolverOptions};
use morrey_core::{Error, FracParams, Lattice};

fn plane(s: f64, p: f64, l: f64, h: f64) -> (Arc<Lattice>, KernelWeights) {
    let lat = Lattice::build(FracParams::new(2, s, p).unwrap(), l, h).unwrap();
    let w = KernelWeights::build(&lat);
    (lat, w)
}

#[test]
fn constant_data_gives_constant_solution() {
    let (lat, w) = plane(0.9, 4.0, 1.0, 0.125);
    let data = slit_data(&lat).unwrap();
    let flat = ComplementData::new(lat.clone(), data.free.clone(), vec![0.7; lat.len()], 0.7).unwrap();
    let u = solve_dirichlet(&w, &flat, 1e-12, 10_000).unwrap();
    assert!(u.values().iter().all(|v| (v - 0.7).abs() < 1e-12));
}

#[test]
fn slit_solution_obeys_maximum_principle_and_negation() {
    let (lat, w) = plane(0.9, 4.0, 1.0, 0.125);
    let data = slit_data(&lat).unwrap();
    let u = solve_dirichlet(&w, &data, 1e-10, 100_000).unwrap();
    let (lo, hi) = data.range();
    assert_eq!((lo, hi), (0.0, 1.0));
    for i in (0..lat.len()).filter(|&i| data.free[i]) {
        assert!(u.value(i) > lo && u.value(i) < hi, "node {i}: {}", u.value(i));
    }
    let v = solve_dirichlet(&w, &data.negated(), 1e-10, 100_000).unwrap();
    assert!(u.combine(1.0, &v, 1.0).unwrap().values().iter().all(|x| x.abs() < 1e-9));
}

#[test]
fn slit_experiment_reports_growing_rings() {
    let params = FracParams::new(2, 0.9, 4.0).unwrap();
    let opts = SolverOptions { optimizer: Optimizer::Lbfgs, ..dirichlet_options(1e-10, 100_000) };
    let report = run_slit_experiment(params, 1.0, 0.0625, &opts).unwrap();
    assert_eq!(report.rings.len(), 2);
    assert!(report.rings_monotone, "{:?}", report.rings);
    assert!(report.negation_defect < 1e-8);
    assert_eq!(report.slit_max, 0.0);
    let barrier = report.barrier.expect("barrier check runs");
    assert!(barrier.pass, "{barrier:?}");
    assert!(barrier.boundary_nodes > 0);
}

#[test]
fn vanishing_data_satisfies_barrier_bound_trivially() {
    let (lat, w) = plane(0.9, 4.0, 1.0, 0.125);
    let data = slit_data(&lat).unwrap();
    let zero = ComplementData::new(lat.clone(), data.free.clone(), vec![0.0; lat.len()], 0.0).unwrap();
    let u = solve_dirichlet(&w, &zero, 1e-12, 10_000).unwrap();
    let report = verify_barrier_bound(&u, &zero, [0.5, 0.0], 0.25, 0.25 * 2.0 / 3.0, 1.0).unwrap();
    assert_eq!(report.worst_ratio, 0.0);
    assert!(report.pass);
}

#[test]
fn barrier_bound_checks_its_hypotheses() {
    let (lat, w) = plane(0.9, 4.0, 1.0, 0.125);
    let data = slit_data(&lat).unwrap();
    let u = solve_dirichlet(&w, &data, 1e-10, 100_000).unwrap();
    // data is not zero on B((0,0), 0.25): the origin carries 1
    assert!(matches!(verify_barrier_bound(&u, &data, [0.0, 0.0], 0.25, 0.1, 1.0), Err(Error::Precondition(_))));
    // |g| exceeds M
    assert!(matches!(verify_barrier_bound(&u, &data, [0.5, 0.0], 0.25, 0.1, 0.5), Err(Error::Precondition(_))));
    assert!(verify_barrier_bound(&u, &data, [0.5, 0.0], 0.25, 0.3, 1.0).is_err());
}

#[test]
fn solvers_reach_the_same_dirichlet_solution() {
    let (lat, w) = plane(0.75, 3.0, 1.0, 0.125);
    let data = slit_data(&lat).unwrap();
    let base = solve_dirichlet(&w, &data, 1e-10, 100_000).unwrap();
    for optimizer in [Optimizer::Jacobi, Optimizer::Lbfgs] {
        let opts = SolverOptions { optimizer, ..dirichlet_options(1e-10, 100_000) };
        let (u, _) = solve_dirichlet_with(&w, &data, &opts).unwrap();
        assert!(u.max_abs_diff(&base).unwrap() < 1e-8, "{optimizer:?}");
    }
}

#[test]
fn complement_data_validates_masks() {
    let (lat, _) = plane(0.9, 4.0, 1.0, 0.5);
    let n = lat.len();
    assert!(ComplementData::new(lat.clone(), vec![true; n], vec![0.0; n], 0.0).is_err());
    assert!(ComplementData::new(lat.clone(), vec![false; n], vec![0.0; n], 0.0).is_err());
    assert!(ComplementData::new(lat.clone(), vec![true; n - 1], vec![0.0; n], 0.0).is_err());
    let mut free = vec![true; n];
    free[0] = false;
    assert!(ComplementData::new(lat.clone(), free, vec![f64::NAN; n], 0.0).is_err());
    let one = Lattice::build(FracParams::new(1, 0.8, 2.0).unwrap(), 1.0, 0.5).unwrap();
    assert!(slit_data(&one).is_err());
}

#[test]
fn complement_round_trips_through_csv() {
    let (lat, _) = plane(0.9, 4.0, 1.0, 0.25);
    let data = slit_data(&lat).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (csv, meta) = (dir.path().join("slit.csv"), dir.path().join("slit.json"));
    io::write_complement(&data, None, &csv, &meta).unwrap();
    let back = io::read_complement(&csv, &meta).unwrap();
    assert_eq!(back.free, data.free);
    assert_eq!(back.g, data.g);
    assert_eq!(back.far_field, data.far_field);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("x,y,value,mask\n"));
}

#[test]
fn decay_study_tracks_far_field() {
    let params = FracParams::new(2, 0.9, 4.0).unwrap();
    let rows = decay_study(params, 0.25, &[2.0, 4.0], &ExtremalOptions::default()).unwrap();
    assert_eq!(rows.len(), 2);
    for row in &rows {
        assert!(row.free_far_field.abs() < 1e-6, "{row:?}");
        assert!(row.far_field_sensitivity < 1e-6);
    }
    assert!(rows[1].decay.strictly_decreasing);
}
