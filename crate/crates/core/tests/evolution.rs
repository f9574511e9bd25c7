use faultline::evolution::{run_evolution, Damping, Forcing, InitialData, TimeConfig};
use faultline::geometry::Side;
use faultline::solvers::{solve_limit_coupled, LoadCase, ProblemKind, SolverOptions};
use faultline::Coefficients;

fn initial_u(x: f64, y: f64, s: Side) -> [f64; 2] {
    let b = 1.0 - y * y;
    [b * (0.3 * x).cos() * (1.0 + 0.2 * s.sign::<f64>()), 0.4 * b * (0.5 * x).sin()]
}

fn initial_gamma(x: f64) -> f64 {
    0.2 * x.cos()
}

fn initial() -> InitialData<'static, f64> {
    InitialData { u: Some(&initial_u), v: None, gamma: Some(&initial_gamma) }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn zero_data_stays_at_rest() {
    let c = Coefficients::reference();
    let (_, tr) =
        run_evolution(ProblemKind::LimitCoupled, 4, 0.0, &c, &Forcing::default(), &InitialData::default(), TimeConfig::new(0.1, 1.0)).unwrap();
    assert!(tr.samples.iter().all(|s| s.u.iter().chain(&s.v).all(|&v| v == 0.0)));
    assert_eq!(tr.initial_energy, 0.0);
}

#[test]
fn frozen_slip_conserves_energy_and_reverses() {
    let c = Coefficients::reference();
    let mut cfg = TimeConfig::new(0.05, 5.0);
    cfg.frozen_slip = true;
    let (ev, tr) = run_evolution(ProblemKind::LimitCoupled, 4, 0.0, &c, &Forcing::default(), &initial(), cfg).unwrap();
    assert_eq!(tr.audit.len(), 100);
    let e0 = tr.initial_energy;
    assert!(e0 > 0.0);
    for row in &tr.audit {
        assert!(((row.kinetic + row.potential - e0) / e0).abs() < 1e-10, "t = {}", row.t);
    }
    let start = tr.samples[0].clone();
    let mut s = start.clone();
    for _ in 0..50 {
        s = ev.step(&s, None).unwrap();
    }
    for _ in 0..50 {
        s = ev.step_back(&s, None).unwrap();
    }
    assert!(max_diff(&s.u, &start.u) < 1e-12 && max_diff(&s.v, &start.v) < 1e-12);
}

#[test]
fn slip_dissipates_and_balances() {
    let c = Coefficients::reference();
    for (kind, eps) in [(ProblemKind::LimitCoupled, 0.0), (ProblemKind::EpsCoupled, 0.1)] {
        let (_, tr) = run_evolution(kind, 4, eps, &c, &Forcing::default(), &initial(), TimeConfig::new(0.05, 2.0)).unwrap();
        for row in &tr.audit {
            assert!(row.dissipation >= 0.0, "{kind:?} t = {}", row.t);
            assert!(row.residual.abs() < 1e-10 * tr.initial_energy.max(1.0));
        }
        let last = tr.audit.last().unwrap();
        assert!(last.kinetic + last.potential < tr.initial_energy);
    }
}

#[test]
fn time_step_halving_is_second_order() {
    let c = Coefficients::reference();
    let finals: Vec<Vec<f64>> = [0.0125, 0.00625, 0.003125]
        .iter()
        .map(|&dt| {
            let (_, tr) = run_evolution(ProblemKind::LimitCoupled, 4, 0.0, &c, &Forcing::default(), &initial(), TimeConfig::new(dt, 1.0)).unwrap();
            tr.final_state().u.clone()
        })
        .collect();
    let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let order = (d(&finals[0], &finals[1]) / d(&finals[1], &finals[2])).log2();
    assert!((1.8..=2.2).contains(&order), "order {order}");
}

#[test]
fn damped_motion_settles_on_the_stationary_solution() {
    let c = Coefficients::reference();
    let f = |x: f64, y: f64, _: Side| [(x + y).sin(), 0.5 * x * y];
    let f0 = |x: f64| (2.0 * x).cos();
    let load = LoadCase { body_force: Some(&f), slip_source: Some(&f0), ..LoadCase::default() };
    let st = solve_limit_coupled(4, &c, &load, &SolverOptions::default()).unwrap();
    let mut cfg = TimeConfig::new(0.1, 40.0);
    cfg.damping = Damping { mass: 4.0, stiffness: 0.0 };
    let (_, tr) = run_evolution(ProblemKind::LimitCoupled, 4, 0.0, &c, &Forcing { load, profile: None }, &InitialData::default(), cfg).unwrap();
    assert!(max_diff(&tr.final_state().u, &st.coeffs) < 1e-6);
}

#[test]
fn thin_faults_approach_the_sharp_evolution() {
    let c = Coefficients::reference();
    let cfg = TimeConfig::new(0.05, 1.0);
    let (sharp, reference) = run_evolution(ProblemKind::LimitCoupled, 16, 0.0, &c, &Forcing::default(), &initial(), cfg).unwrap();
    let mut prev = f64::INFINITY;
    for eps in [0.2, 0.1, 0.05] {
        let (ev, tr) = run_evolution(ProblemKind::EpsCoupled, 16, eps, &c, &Forcing::default(), &initial(), cfg).unwrap();
        let dist = ev.discretization().l2_distance(&tr.final_state().u, sharp.discretization(), &reference.final_state().u).unwrap();
        assert!(dist < 0.7 * prev, "eps = {eps}: {dist}");
        prev = dist;
        let slip = tr.final_state().gamma(ev.discretization());
        assert!(slip.iter().all(|g| g.abs() < 1.0));
    }
}

#[test]
fn invalid_configurations_are_rejected() {
    let c = Coefficients::reference();
    let init = InitialData::default();
    let run = |kind, eps, cfg| run_evolution(kind, 4, eps, &c, &Forcing::default(), &init, cfg);
    assert!(run(ProblemKind::LimitCoupled, 0.0, TimeConfig::new(0.0, 1.0)).is_err());
    assert!(run(ProblemKind::LimitCoupled, 0.0, TimeConfig::new(0.1, -1.0)).is_err());
    assert!(run(ProblemKind::EpsCoupled, 0.0, TimeConfig::new(0.1, 1.0)).is_err());
    let u = |x: f64, _: f64, _: Side| [x, 0.0];
    let forcing = Forcing { load: LoadCase { boundary: Some(&u), ..LoadCase::default() }, profile: None };
    assert!(run_evolution(ProblemKind::LimitCoupled, 4, 0.0, &c, &forcing, &init, TimeConfig::new(0.1, 1.0)).is_err());
}
