use faultline::analysis::{
    axial, cross_rowwise, curl_curl_ansatz, curl_rowwise, defect_velocity_ansatz, plasticity_lemma_residual, GridAxis, GridFunction3, Mat3,
    PlasticityData,
};
use faultline::error::Error;

const NU: f64 = 0.1;
const ETA: f64 = 2.0;

fn gamma(t: f64, x: f64, _: f64) -> f64 {
    t.exp() * x.sin() + 2.0
}

fn displacement(t: f64, x: f64, y: f64) -> [f64; 2] {
    [(t + x).sin() * y.cos(), (t * y).cos() + x * x]
}

/// Symmetric stress whose shear closes the slip law
/// `gamma_t + beta gamma_x^2 (eta' - nu gamma_xx - T12) = 0` with `beta = 1`.
fn stress(t: f64, x: f64, y: f64) -> [[f64; 2]; 2] {
    let (g, gx, gxx, gt) = (gamma(t, x, y), t.exp() * x.cos(), -t.exp() * x.sin(), t.exp() * x.sin());
    let t12 = ETA * g - NU * gxx + gt / (gx * gx);
    [[x * y + t, t12], [t12, (x - y).cos()]]
}

fn data<'a>(g: &'a dyn Fn(f64, f64, f64) -> f64, s: &'a dyn Fn(f64, f64, f64) -> [[f64; 2]; 2]) -> PlasticityData<'a, f64> {
    PlasticityData { gamma: g, eta_prime: &|g| ETA * g, beta: &|_, _, _| 1.0, nu: NU, u: &displacement, stress: s }
}

fn grid(k: usize) -> (GridAxis<f64>, GridAxis<f64>, GridAxis<f64>) {
    (GridAxis::span(0.0, 0.5, k).unwrap(), GridAxis::span(-0.8, 0.8, k).unwrap(), GridAxis::span(-0.05, 0.05, k).unwrap())
}

fn max_abs(m: &Mat3<f64>) -> f64 {
    m.iter().flatten().fold(0.0, |a, v| a.max(v.abs()))
}

#[test]
fn curl_of_a_shear_slip() {
    let (t, x, y) = grid(9);
    let g = GridFunction3::sample(t, x, y, &gamma, &displacement, &stress).unwrap();
    let z = 0.0;
    let field: Vec<Mat3<f64>> = g.gamma.iter().map(|&v| [[z, -v, z], [z; 3], [z; 3]]).collect();
    let curl = curl_rowwise(&g, &field).unwrap();
    for it in 0..t.len {
        for ix in 2..x.len - 2 {
            for iy in 0..y.len {
                let c = curl[g.index(it, ix, iy)];
                let gx = t.at(it).exp() * x.at(ix).cos();
                assert!((c[0][2] + gx).abs() < 1e-2 * gx.abs());
                let mut rest = c;
                rest[0][2] = 0.0;
                assert!(max_abs(&rest) < 1e-12);
            }
        }
    }
}

#[test]
fn axial_vector_of_the_slip_curl() {
    let gx = 0.37;
    let curl = [[0.0, 0.0, -gx], [0.0; 3], [0.0; 3]];
    assert_eq!(axial(&curl), [0.0, gx, 0.0]);
    let sym = [[1.0, 2.0, 3.0], [2.0, 4.0, 5.0], [3.0, 5.0, 6.0]];
    assert_eq!(axial(&sym), [0.0; 3]);
    // rows of A cross v
    let a = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]];
    let c = cross_rowwise(&a, &[0.0, 0.0, 1.0]);
    assert_eq!(c, [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0; 3]]);
    assert_eq!(curl_curl_ansatz(2.0, 3.0)[0], [-3.0, 2.0, 0.0]);
}

// Differences along different axes commute, so the discrete curl of the
// discrete gradient vanishes up to roundoff.
#[test]
fn gradients_are_curl_free() {
    for k in [9, 17, 33] {
        let (t, x, y) = grid(k);
        let g = GridFunction3::sample(t, x, y, &gamma, &displacement, &stress).unwrap();
        let curl = curl_rowwise(&g, &g.grad_u()).unwrap();
        let worst = curl.iter().map(max_abs).fold(0.0, f64::max);
        assert!(worst < 1e-8, "{k}: {worst}");
    }
}

#[test]
fn residual_is_second_order() {
    let d = data(&gamma, &stress);
    let mut prev = f64::NAN;
    for (n, k) in [9usize, 17, 33, 65].into_iter().enumerate() {
        let (t, x, y) = grid(k);
        let r = plasticity_lemma_residual(&d, t, x, y).unwrap();
        if n > 0 {
            let ratio = prev / r;
            assert!((3.5..=4.5).contains(&ratio), "{k}: ratio {ratio}");
        }
        prev = r;
    }
}

#[test]
fn defect_velocity_matches_the_closed_form() {
    for i in 0..50 {
        let (t, x) = (0.5 * (i as f64 * 0.37).sin().abs(), -0.8 + 1.6 * (i as f64 * 0.61).cos().abs());
        let y = 0.02 * (i as f64).sin();
        let (gx, gxx) = (t.exp() * x.cos(), -t.exp() * x.sin());
        let s = stress(t, x, y);
        let s3 = [[s[0][0], s[0][1], 0.0], [s[1][0], s[1][1], 0.0], [0.0; 3]];
        let beta = 1.0 + 0.5 * x * x;
        let eta_p = ETA * gamma(t, x, y);
        let v = defect_velocity_ansatz(gx, gxx, 0.0, eta_p, &s3, NU, beta).unwrap();
        let expected = beta * gx * (eta_p - NU * gxx - s[0][1]);
        assert!((v[0] - expected).abs() < 1e-10, "{i}: {} vs {expected}", v[0]);
        assert!(v[1].abs() < 1e-10 && v[2].abs() < 1e-10);
    }
}

#[test]
fn flat_slip_has_no_defect_direction() {
    let flat = |t: f64, _: f64, _: f64| 1.0 + t;
    let s = |_: f64, _: f64, _: f64| [[1.0, 0.5], [0.5, 1.0]];
    let (t, x, y) = grid(9);
    let err = plasticity_lemma_residual(&data(&flat, &s), t, x, y).unwrap_err();
    assert!(matches!(err, Error::DegenerateDirection { .. }), "{err}");
    let v = defect_velocity_ansatz(0.0, 0.0, 0.0, 1.0, &[[0.0; 3]; 3], NU, 1.0);
    assert!(v.is_none());
}

#[test]
fn coarse_grids_are_rejected() {
    assert!(matches!(GridAxis::span(0.0, 1.0, 2), Err(Error::GridTooCoarse { points: 2, required: 3 })));
    let (t, x, _) = grid(9);
    let y = GridAxis::span(-0.05, 0.05, 4).unwrap();
    let err = plasticity_lemma_residual(&data(&gamma, &stress), t, x, y).unwrap_err();
    assert!(matches!(err, Error::GridTooCoarse { points: 4, required: 5 }));
    let asym = |_: f64, _: f64, _: f64| [[1.0, 0.5], [0.2, 1.0]];
    assert!(GridFunction3::sample(t, x, GridAxis::span(-0.05, 0.05, 5).unwrap(), &gamma, &displacement, &asym).is_err());
}
