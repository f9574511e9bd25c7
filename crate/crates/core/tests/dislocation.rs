use std::f64::consts::PI;

use faultline::geometry::Side;
use faultline::manufactured::{error_norms, slip_norm, Dislocation, ExactSolution};
use faultline::report::rate;
use faultline::solvers::{solve_limit_coupled, LoadCase, SolverOptions};
use faultline::Coefficients;

// Published L2 displacement errors at h = 1/8 .. 1/64.
const PUBLISHED_L2: [f64; 4] = [1.226581e-02, 6.141691e-03, 3.073164e-03, 1.537180e-03];

// |P gamma| in L2(-1, 1) for the L2 projection P onto continuous P2 on n
// segments of the exact slip [x < 0] - 3 / (4 pi x), by an independent
// dense assembly with 3-point Gauss per segment.
const PROJECTED_SLIP_NORM: [f64; 4] = [2.544780, 3.266750, 4.326795, 5.872281];

fn dislocation() -> Dislocation<f64> {
    Dislocation::new(Coefficients::reference()).unwrap()
}

fn run(n: usize) -> (f64, f64) {
    let c = Coefficients::reference();
    let d = dislocation();
    // The interpolant only reads boundary rows, away from the singular node.
    let u = |x, y, s| d.displacement(x, y, s);
    let st = |x, y, _: Side| d.dislocation_stress(x, y).unwrap();
    let f0 = |x| d.dislocation_f0(x).unwrap();
    let load = LoadCase { slip_source: Some(&f0), boundary: Some(&u), side_stress: Some(&st), ..LoadCase::default() };
    let sol = solve_limit_coupled(n, &c, &load, &SolverOptions::default()).unwrap();
    let e = error_norms(&sol.disc, &sol.coeffs, &d, false).unwrap();
    (e.l2_u, slip_norm(&sol.disc, &sol.coeffs).unwrap())
}

#[test]
fn displacement_jumps_by_one_on_the_slipped_half() {
    let d = dislocation();
    for x in [-0.9, -0.5, -0.1, 0.1, 0.5, 0.9] {
        let p = d.dislocation_u(x, 0.0, Side::Plus).unwrap();
        let m = d.dislocation_u(x, 0.0, Side::Minus).unwrap();
        assert!((p[0] - m[0] - d.jump(x)).abs() < 1e-14, "x = {x}");
        assert_eq!(p[1], m[1]);
    }
    assert!(d.dislocation_u(0.0, 0.0, Side::Plus).is_err());
    assert!(d.gamma(0.0).is_err());
}

#[test]
fn stress_decays_like_one_over_r() {
    let d = dislocation();
    for (x, y) in [(0.3, 0.4), (-0.2, 0.7), (0.5, -0.5)] {
        let near = d.dislocation_stress(x, y).unwrap();
        let far = d.dislocation_stress(2.0 * x, 2.0 * y).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((near[i][j] - 2.0 * far[i][j]).abs() < 1e-12 * near[i][j].abs().max(1.0));
            }
        }
    }
}

#[test]
fn slip_source_values() {
    // lambda = 2, mu = 1, eta_hat = 2: f0 = 2 [x < 0] - 9 / (4 pi x).
    let d = dislocation();
    let f1 = d.dislocation_f0(1.0).unwrap();
    assert!((f1 + 9.0 / (4.0 * PI)).abs() < 1e-14);
    for x in [0.1, 0.37, 0.8] {
        let s = d.dislocation_f0(x).unwrap() + d.dislocation_f0(-x).unwrap();
        assert!((s - 2.0).abs() < 1e-12);
    }
}

#[test]
fn discrete_slip_follows_its_projection() {
    let levels: Vec<(f64, f64)> = [8, 16, 32].iter().map(|&n| run(n)).collect();
    for (k, &(l2, g)) in levels.iter().enumerate() {
        assert!((g / PROJECTED_SLIP_NORM[k] - 1.0).abs() < 0.01, "level {k}: {g}");
        assert!(l2 < 3.0 * PUBLISHED_L2[k] && l2 > PUBLISHED_L2[k] / 3.0, "level {k}: {l2}");
    }
    for w in levels.windows(2) {
        let r = rate(w[0].0, w[1].0);
        assert!((0.9..=1.1).contains(&r), "L2 rate {r}");
        assert!(w[1].1 > w[0].1);
    }
}
