use faultline::geometry::Side;
use faultline::manufactured::{error_norms, exact_norms, ErrorReport, Manufactured};
use faultline::report::rate;
use faultline::solvers::{
    assemble_operator, energy_of, solve_limit_coupled, solve_limit_uncoupled, LoadCase, Slip, SolverOptions, StationarySolution,
};
use faultline::Coefficients;

// Published errors at h = 1/8, 1/16, 1/32.
const UNCOUPLED_L2: [f64; 3] = [1.684735e-05, 2.098734e-06, 2.617986e-07];
const UNCOUPLED_H1: [f64; 3] = [4.402589e-04, 1.091350e-04, 2.718018e-05];
const COUPLED_GAMMA: [f64; 3] = [1.597969e-05, 2.077018e-06, 2.646097e-07];

fn solve(n: usize, coupled: bool) -> (StationarySolution<f64>, ErrorReport) {
    let m = Manufactured::<f64>::reference();
    let c = Coefficients::reference();
    let u = |x, y, s| m.exact_u0(x, y, s);
    let f = |x, y, s| m.manufactured_f(x, y, s);
    let st = |x, y, s| m.stress_u0(x, y, s);
    let g = |x| m.exact_gamma0(x);
    let f0 = |x| m.manufactured_f0(x);
    let mut load = LoadCase { body_force: Some(&f), boundary: Some(&u), side_stress: Some(&st), ..LoadCase::default() };
    let sol = if coupled {
        load.slip_source = Some(&f0);
        solve_limit_coupled(n, &c, &load, &SolverOptions::default())
    } else {
        load.slip_data = Some(&g);
        solve_limit_uncoupled(n, &c, &load, &SolverOptions::default())
    }
    .unwrap();
    let e = error_norms(&sol.disc, &sol.coeffs, &m, coupled).unwrap();
    (sol, e)
}

fn within_factor(ours: f64, published: f64, f: f64) -> bool {
    ours < f * published && ours > published / f
}

#[test]
fn uncoupled_rates_and_magnitudes() {
    let rows: Vec<ErrorReport> = [8, 16, 32].iter().map(|&n| solve(n, false).1).collect();
    for (k, r) in rows.iter().enumerate() {
        assert!(within_factor(r.l2_u, UNCOUPLED_L2[k], 3.0), "L2 at level {k}: {}", r.l2_u);
        assert!(within_factor(r.h1_u, UNCOUPLED_H1[k], 3.0), "H1 at level {k}: {}", r.h1_u);
    }
    for w in rows.windows(2) {
        let (l2, h1) = (rate(w[0].l2_u, w[1].l2_u), rate(w[0].h1_u, w[1].h1_u));
        assert!((2.8..=3.2).contains(&l2), "L2 rate {l2}");
        assert!((1.85..=2.15).contains(&h1), "H1 rate {h1}");
    }
}

#[test]
fn coupled_rates_and_slip_error() {
    let rows: Vec<ErrorReport> = [8, 16, 32].iter().map(|&n| solve(n, true).1).collect();
    for (k, r) in rows.iter().enumerate() {
        let g = r.l2_gamma.unwrap();
        assert!(within_factor(g, COUPLED_GAMMA[k], 3.0), "slip error at level {k}: {g}");
    }
    for w in rows.windows(2) {
        let g = rate(w[0].l2_gamma.unwrap(), w[1].l2_gamma.unwrap());
        assert!((2.8..=3.2).contains(&rate(w[0].l2_u, w[1].l2_u)));
        assert!((1.85..=2.15).contains(&rate(w[0].h1_u, w[1].h1_u)));
        assert!((2.8..=3.2).contains(&g), "slip rate {g}");
    }
}

#[test]
fn solution_norms_match_table_footer() {
    let m = Manufactured::<f64>::reference();
    let (l2, h1, g) = exact_norms(&m, 16, 7).unwrap();
    assert!((l2 - 1.435134).abs() < 1e-4, "{l2}");
    assert!((h1 - 1.662724).abs() < 1e-4, "{h1}");
    assert!((g.unwrap() - 1.365834).abs() < 1e-4);
}

#[test]
fn unknown_counts_follow_the_q2_layout() {
    // 17 x 17 node positions, rows y = +-1 clamped, u1 doubled on the interface.
    let (_, e8) = solve(8, false);
    let (_, c8) = solve(8, true);
    assert_eq!(e8.ndofs, 2 * 17 * 15 + 17);
    assert_eq!(c8.ndofs, e8.ndofs + 17);
}

// The slip row decouples pointwise: with nu = 0 and a polynomial f0 of the
// trace degree, gamma_h = (f0 + mu [u1]_h) / (eta_hat + mu).
#[test]
fn slip_is_locally_eliminated() {
    let c = Coefficients::reference();
    let f = |x: f64, y: f64, _: Side| [(x + y).sin(), x * y];
    let f0 = |x: f64| 1.0 - 0.5 * x + 0.25 * x * x;
    let load = LoadCase { body_force: Some(&f), slip_source: Some(&f0), ..LoadCase::default() };
    let sol = solve_limit_coupled(8, &c, &load, &SolverOptions::default()).unwrap();
    for k in 0..=40 {
        let x = -1.0 + k as f64 / 20.0;
        let (g, _) = sol.disc.gamma_at(&sol.coeffs, x).unwrap();
        let jump = sol.disc.jump_at(&sol.coeffs, x).unwrap();
        let expected = (f0(x) + c.mu * jump) / (c.eta_hat + c.mu);
        assert!((g - expected).abs() < 1e-10, "x = {x}: {g} vs {expected}");
    }
}

// Without body force the solution is stationary for the energy, so every
// admissible perturbation v raises it by exactly 1/2 v.Kv (slip kept
// polynomial so both quadratures are exact).
#[test]
fn galerkin_orthogonality_of_the_energy() {
    let c = Coefficients::reference();
    let b = |x: f64, y: f64, _: Side| [0.1 * (1.0 + y) * x, 0.05 * (x - y)];
    let g = |x: f64| 0.3 * (1.0 - x * x) + 0.1 * x;
    let load = LoadCase { slip_data: Some(&g), boundary: Some(&b), ..LoadCase::default() };
    let sol = solve_limit_uncoupled(4, &c, &load, &SolverOptions::default()).unwrap();
    let k = assemble_operator(sol.kind, &sol.disc, &sol.materials).unwrap();
    let e0 = energy_of(&sol.disc, &sol.materials, &sol.coeffs, Slip::Given(&g), sol.kind).unwrap();
    let free: Vec<bool> = sol.disc.dofs().constrained().iter().map(|c| !c).collect();
    for seed in 0..5u64 {
        let v: Vec<f64> = (0..sol.coeffs.len()).map(|i| if free[i] { ((i as f64 + 1.0) * (seed as f64 + 0.7)).sin() * 0.01 } else { 0.0 }).collect();
        let moved: Vec<f64> = sol.coeffs.iter().zip(&v).map(|(a, b)| a + b).collect();
        let e1 = energy_of(&sol.disc, &sol.materials, &moved, Slip::Given(&g), sol.kind).unwrap();
        let q = 0.5 * k.quadratic_form(&v);
        assert!(q > 0.0);
        assert!((e1 - e0 - q).abs() < 1e-10 * q.max(1e-12), "seed {seed}: {} vs {q}", e1 - e0);
    }
}

#[test]
fn interface_jump_tracks_the_exact_slip() {
    let m = Manufactured::<f64>::reference();
    let (sol, _) = solve(16, false);
    for k in 0..=20 {
        let x = -1.0 + k as f64 / 10.0;
        let jump = sol.disc.jump_at(&sol.coeffs, x).unwrap();
        assert!((jump - m.jump(x)).abs() < 1e-4, "x = {x}");
    }
}
