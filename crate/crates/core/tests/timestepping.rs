use std::f64::consts::PI;
use std::sync::Arc;

use polydg_core::assembly::{l2_error, mean_value, ConductivityField};
use polydg_core::ionics::{FitzHughNagumo, IonicModel, NoIonicCurrent};
use polydg_core::mesh::{generate_polygonal_mesh, PolygonalMesh};
use polydg_core::timestepper::*;
use polydg_core::{Point, Rect};

fn mesh(n: usize, seed: u64) -> Arc<PolygonalMesh> {
    Arc::new(generate_polygonal_mesh(n, Rect::unit(), seed, 10).unwrap().assign_regions(0.5))
}

fn problem(mesh: Arc<PolygonalMesh>, p: usize, dt: f64, chi: f64, sigma: &ConductivityField, kind: PreconditionerKind, tol: f64) -> DiscreteProblem {
    let spec = DiscretizationSpec { degree: p, eta0: 10.0, dt, membrane: MembraneParams { chi_m: chi, c_m: 1.0 } };
    let solver = SolverSpec { tol, precond: PreconditionerSpec { kind, ..Default::default() }, ..Default::default() };
    DiscreteProblem::new(mesh, sigma, spec, solver).unwrap()
}

#[test]
fn resting_state_does_not_drift() {
    let pr = problem(mesh(64, 1), 2, 2.5e-3, 1000.0, &ConductivityField::brain_default(), PreconditionerKind::TwoLevel, 1e-9);
    let model = FitzHughNagumo::default();
    let mut st = pr.initial_state(|_| model.u_min, &model);
    let u0 = st.u.clone();
    Stepper::new(&pr, &model, None).run(&mut st, 100, |_, _| {}).unwrap();
    let drift = st.u.iter().zip(&u0).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(drift <= 1e-8, "drift {drift}");
    assert!(st.y[0].iter().all(|v| v.abs() <= 1e-12));
}

#[test]
fn mean_is_conserved_without_sources() {
    let pr = problem(mesh(64, 3), 1, 2.5e-3, 0.1, &ConductivityField::brain_default(), PreconditionerKind::TwoLevel, 1e-11);
    let model = NoIonicCurrent;
    let mut st = pr.initial_state(pathological_region_potential, &model);
    let m0 = mean_value(pr.space(), pr.mass(), &st.u);
    let stepper = Stepper::new(&pr, &model, None);
    for _ in 0..50 {
        stepper.advance(&mut st).unwrap();
        let m = mean_value(pr.space(), pr.mass(), &st.u);
        assert!((m - m0).abs() <= 1e-6 * m0.abs(), "{m} vs {m0}");
    }
}

#[test]
fn time_is_step_count_times_dt() {
    let pr = problem(mesh(32, 5), 1, 1e-3, 1000.0, &ConductivityField::brain_default(), PreconditionerKind::BlockJacobi, 1e-9);
    let model = FitzHughNagumo::default();
    let mut st = pr.initial_state(pathological_region_potential, &model);
    Stepper::new(&pr, &model, None).run(&mut st, 250, |s, _| assert_eq!(s.t, s.k as f64 * 1e-3)).unwrap();
    assert_eq!(st.k, 250);
    assert_eq!(step_count(0.25, 1e-3), 250);
    assert_eq!(step_count(2.0, 2.5e-3), 800);
}

#[test]
fn runs_are_bitwise_deterministic() {
    let run = || {
        let pr = problem(mesh(64, 7), 2, 2.5e-3, 1000.0, &ConductivityField::brain_default(), PreconditionerKind::TwoLevel, 1e-9);
        let model = FitzHughNagumo::default();
        let mut st = pr.initial_state(pathological_region_potential, &model);
        let stats = Stepper::new(&pr, &model, None).run(&mut st, 20, |_, _| {}).unwrap();
        (st, stats)
    };
    let (a, sa) = run();
    let (b, sb) = run();
    assert_eq!(a, b);
    assert_eq!(sa, sb);
}

#[test]
fn preconditioners_agree_on_the_solution() {
    let m = mesh(64, 9);
    let model = FitzHughNagumo::default();
    let mut finals = Vec::new();
    for kind in [PreconditionerKind::None, PreconditionerKind::BlockJacobi, PreconditionerKind::TwoLevel] {
        let spec = DiscretizationSpec { degree: 1, eta0: 10.0, dt: 2.5e-3, membrane: MembraneParams { chi_m: 0.1, c_m: 1.0 } };
        let solver = SolverSpec { tol: 1e-11, maxit: Some(5000), precond: PreconditionerSpec { kind, ..Default::default() }, ..Default::default() };
        let pr = DiscreteProblem::new(m.clone(), &ConductivityField::brain_default(), spec, solver).unwrap();
        let mut st = pr.initial_state(pathological_region_potential, &model);
        Stepper::new(&pr, &model, None).run(&mut st, 10, |_, _| {}).unwrap();
        finals.push(st.u);
    }
    for f in &finals[1..] {
        let d = f.iter().zip(&finals[0]).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(d < 1e-6, "{d}");
    }
}

/// u = cos(pi x) cos(pi y) e^{-t} solves chi C u_t - div(grad u) = f with
/// f = (2 pi^2 - chi C) u and homogeneous Neumann data on the unit square.
fn manufactured(x: Point, t: f64) -> f64 {
    (PI * x[0]).cos() * (PI * x[1]).cos() * (-t).exp()
}

#[test]
fn manufactured_solution_is_tracked() {
    let sigma = ConductivityField::uniform(1.0).unwrap();
    let pr = problem(mesh(128, 11), 2, 1e-3, 1.0, &sigma, PreconditionerKind::TwoLevel, 1e-12);
    let src = |x: Point, t: f64| (2.0 * PI * PI - 1.0) * manufactured(x, t);
    let model = NoIonicCurrent;
    let mut st = pr.initial_state(|x| manufactured(x, 0.0), &model);
    Stepper::new(&pr, &model, Some(&src)).run(&mut st, 50, |_, _| {}).unwrap();
    let err = l2_error(pr.space(), &st.u, |x| manufactured(x, st.t));
    assert!(err < 5e-3, "L2 error {err}");
}

#[test]
fn non_convergence_is_reported() {
    let spec = DiscretizationSpec { degree: 1, eta0: 10.0, dt: 2.5e-3, membrane: MembraneParams { chi_m: 0.1, c_m: 1.0 } };
    let solver = SolverSpec { tol: 1e-12, maxit: Some(2), precond: PreconditionerSpec { kind: PreconditionerKind::None, ..Default::default() }, ..Default::default() };
    let pr = DiscreteProblem::new(mesh(64, 13), &ConductivityField::brain_default(), spec, solver).unwrap();
    let model = FitzHughNagumo::default();
    let mut st = pr.initial_state(pathological_region_potential, &model);
    let err = Stepper::new(&pr, &model, None).advance(&mut st).unwrap_err();
    assert_eq!(err.step(), 0);
    assert!(matches!(err, polydg_core::error::StepError::NotConverged { .. }));
}

#[test]
fn invalid_setups_are_rejected() {
    let sigma = ConductivityField::brain_default();
    let base = DiscretizationSpec { degree: 1, eta0: 10.0, dt: 2.5e-3, membrane: MembraneParams::default() };
    let m = mesh(16, 15);
    let bad_tol = SolverSpec { tol: 0.0, ..Default::default() };
    assert!(DiscreteProblem::new(m.clone(), &sigma, base, bad_tol).is_err());
    let bad_ratio = SolverSpec { precond: PreconditionerSpec { coarse_ratio: 3, ..Default::default() }, ..Default::default() };
    assert!(DiscreteProblem::new(m.clone(), &sigma, base, bad_ratio).is_err());
    let bad_q = SolverSpec { precond: PreconditionerSpec { q: 2, ..Default::default() }, ..Default::default() };
    assert!(DiscreteProblem::new(m.clone(), &sigma, base, bad_q).is_err());
    assert!(DiscreteProblem::new(m.clone(), &sigma, DiscretizationSpec { degree: 0, ..base }, SolverSpec::default()).is_err());
    assert!(DiscreteProblem::new(m, &sigma, DiscretizationSpec { dt: -1.0, ..base }, SolverSpec::default()).is_err());
}

#[test]
fn gating_variable_follows_explicit_euler() {
    // a single square cell with constant states: the update is the scalar ODE step
    let cell = PolygonalMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], vec![vec![0, 1, 2, 3]], vec![polydg_core::Region::Grey]).unwrap();
    let pr = problem(Arc::new(cell), 1, 2.5e-3, 1000.0, &ConductivityField::brain_default(), PreconditionerKind::BlockJacobi, 1e-12);
    let model = FitzHughNagumo::default();
    let mut st = pr.initial_state(|_| -50.0, &model);
    Stepper::new(&pr, &model, None).advance(&mut st).unwrap();
    let mut r = [0.0];
    model.rhs(-50.0, &[0.0], &mut r);
    let y_mean = pr.space().cell_mean(&st.y[0], 0);
    assert!((y_mean - (0.0 - 2.5e-3 * r[0])).abs() < 1e-12);
    // first step: chi C (u1 - u0) = -chi dt I(u0)
    let f = model.rhs(-50.0, &[0.0], &mut r);
    let u_mean = pr.space().cell_mean(&st.u, 0);
    assert!((u_mean - (-50.0 - 2.5e-3 * f)).abs() < 1e-9, "{u_mean}");
}
