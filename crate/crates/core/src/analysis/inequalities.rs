//! The Poincaré inequality on the strip and the coercivity bounds of the
//! thin-fault energy, evaluated by quadrature.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{composite, integrate2};
use crate::error::{Error, Result};
use crate::fem::assembly::{ElementQuadrature, LineFunction, NORM_ORDER};
use crate::fem::quadrature::GaussRule1d;
use crate::field::Discretization;
use crate::geometry::{FaultGeometry, Region};
use crate::material::{Coefficients, MaterialField};
use crate::scalar::Real;
use crate::solvers::{energy_with_scaling, Slip};

/// Scalar field with its gradient.
pub type ScalarField<'a, T> = &'a dyn Fn(T, T) -> (T, [T; 2]);

const RULE: usize = 8;
const CELLS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub pass: bool,
}

/// `1/2 |u|_{L2(S_eps)} <= (eps^2 |u_y|^2_{L2(S_eps)} + eps/2 |u|^2_{H1(Omega_eps)})^{1/2}`
/// for `u` vanishing on `y = +-1`.
pub fn poincare_check<T: Real>(u: ScalarField<'_, T>, eps: T) -> Result<InequalityCheck<T>> {
    if FaultGeometry::new(eps)?.is_sharp() {
        return Err(Error::InvalidGeometry("the strip inequality needs eps > 0".into()));
    }
    for k in 0..=32 {
        let x = -T::one() + T::from_usize_lossy(k) / T::lit(16.0);
        for y in [-T::one(), T::one()] {
            let v = u(x, y).0;
            if v.is_nan() || v.abs() > T::lit(1e-10) {
                return Err(Error::BoundaryViolation { x: x.to_f64_lossy(), value: v.abs().to_f64_lossy() });
            }
        }
    }
    let rule = GaussRule1d::new(RULE)?;
    let h = eps * T::half();
    let xs = composite(&rule, -T::one(), T::one(), CELLS);
    let strip = composite(&rule, -h, h, 2);
    let s_l2 = integrate2(&xs, &strip, |x, y| u(x, y).0.powi(2));
    let s_dy = integrate2(&xs, &strip, |x, y| u(x, y).1[1].powi(2));
    let h1 = |x: T, y: T| {
        let (v, g) = u(x, y);
        v * v + g[0] * g[0] + g[1] * g[1]
    };
    let bands = integrate2(&xs, &composite(&rule, h, T::one(), CELLS), h1) + integrate2(&xs, &composite(&rule, -T::one(), -h, CELLS), h1);
    let lhs = T::half() * s_l2.sqrt();
    let rhs = (eps * eps * s_dy + h * bands).sqrt();
    Ok(InequalityCheck { lhs, rhs, pass: lhs <= rhs + T::lit(1e-10) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Profile {
    /// `(1 - y^2)(y - c)^p`
    Bubble { power: i32, shift: f64 },
    /// `sin(k pi (1 + y) / 2)`
    Sine { k: u32 },
    /// `(1 - y^2) cos(w y + phase)`
    BubbleCos { freq: f64, phase: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Modulation {
    Poly([f64; 3]),
    Cos { freq: f64, phase: f64 },
    Exp(f64),
}

impl Profile {
    fn eval(self, y: f64) -> (f64, f64) {
        match self {
            Profile::Bubble { power, shift } => {
                let b = 1.0 - y * y;
                let s = y - shift;
                let dp = if power == 0 { 0.0 } else { f64::from(power) * s.powi(power - 1) };
                (b * s.powi(power), -2.0 * y * s.powi(power) + b * dp)
            }
            Profile::Sine { k } => {
                let w = f64::from(k) * std::f64::consts::FRAC_PI_2;
                ((w * (1.0 + y)).sin(), w * (w * (1.0 + y)).cos())
            }
            Profile::BubbleCos { freq, phase } => {
                let b = 1.0 - y * y;
                let (s, c) = (freq * y + phase).sin_cos();
                (b * c, -2.0 * y * c - b * freq * s)
            }
        }
    }

    fn random(rng: &mut ChaCha8Rng) -> Self {
        match rng.gen_range(0..3) {
            0 => Profile::Bubble { power: rng.gen_range(0..4), shift: rng.gen_range(-1.0..1.0) },
            1 => Profile::Sine { k: rng.gen_range(1..7) },
            _ => Profile::BubbleCos { freq: rng.gen_range(0.0..8.0), phase: rng.gen_range(0.0..std::f64::consts::TAU) },
        }
    }
}

impl Modulation {
    fn eval(self, x: f64) -> (f64, f64) {
        match self {
            Modulation::Poly([a, b, c]) => (a + b * x + c * x * x, b + 2.0 * c * x),
            Modulation::Cos { freq, phase } => {
                let (s, c) = (freq * x + phase).sin_cos();
                (c, -freq * s)
            }
            Modulation::Exp(c) => ((c * x).exp(), c * (c * x).exp()),
        }
    }

    fn random(rng: &mut ChaCha8Rng) -> Self {
        match rng.gen_range(0..3) {
            0 => Modulation::Poly([rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]),
            1 => Modulation::Cos { freq: rng.gen_range(0.0..6.0), phase: rng.gen_range(0.0..std::f64::consts::TAU) },
            _ => Modulation::Exp(rng.gen_range(-2.0..2.0)),
        }
    }
}

/// `a P(y) M(x)` with `P` vanishing at `y = +-1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    amplitude: f64,
    profile: Profile,
    modulation: Modulation,
}

impl TestFunction {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        Self { amplitude: rng.gen_range(0.1..3.0), profile: Profile::random(rng), modulation: Modulation::random(rng) }
    }

    /// `sin(k pi (1 + y) / 2)`, constant in `x`; `k = 1` gives `cos(pi y / 2)`.
    pub fn standing_wave(k: u32) -> Self {
        Self { amplitude: 1.0, profile: Profile::Sine { k }, modulation: Modulation::Poly([1.0, 0.0, 0.0]) }
    }

    pub fn eval(&self, x: f64, y: f64) -> (f64, [f64; 2]) {
        let (p, dp) = self.profile.eval(y);
        let (m, dm) = self.modulation.eval(x);
        let a = self.amplitude;
        (a * p * m, [a * p * dm, a * dp * m])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareRow {
    pub case: usize,
    pub eps: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Poincaré check on `cases` random sums of two test functions, each at
/// every `eps`.
pub fn poincare_audit(seed: u64, cases: usize, eps_list: &[f64]) -> Result<Vec<PoincareRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(cases * eps_list.len());
    for case in 0..cases {
        let (a, b) = (TestFunction::random(&mut rng), TestFunction::random(&mut rng));
        let u = |x: f64, y: f64| {
            let (va, ga) = a.eval(x, y);
            let (vb, gb) = b.eval(x, y);
            (va + vb, [ga[0] + gb[0], ga[1] + gb[1]])
        };
        for &eps in eps_list {
            let c = poincare_check(&u, eps)?;
            rows.push(PoincareRow { case, eps, lhs: c.lhs, rhs: c.rhs, pass: c.pass });
        }
    }
    Ok(rows)
}

/// Both sides' ingredients of the three coercivity bounds:
/// `lhs[0] = |u1x|^2 + |u1y|^2_{Omega_eps} + |u2x|^2_{Omega_eps} + |u2y|^2` against `I_eps`,
/// `lhs[1] = eps (|u2x|^2 + |u1y|^2)` and `lhs[2] = |u|^2` against `I_eps + |gamma|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivityTerms<T> {
    pub lhs: [T; 3],
    pub energy: T,
    pub gamma_sq: T,
}

impl<T: Real> CoercivityTerms<T> {
    pub fn bases(&self) -> [T; 3] {
        let g = self.energy + self.gamma_sq;
        [self.energy, g, g]
    }

    /// `lhs / base`, zero when both vanish.
    pub fn ratios(&self) -> [T; 3] {
        let b = self.bases();
        let mut r = [T::zero(); 3];
        for k in 0..3 {
            r[k] = if self.lhs[k] == T::zero() { T::zero() } else { self.lhs[k] / b[k] };
        }
        r
    }
}

pub fn coercivity_terms<T: Real>(
    disc: &Discretization<T>,
    coeffs: &[T],
    gamma: LineFunction<'_, T>,
    mat: &MaterialField<T>,
) -> Result<CoercivityTerms<T>> {
    let mesh = disc.mesh();
    if mesh.is_sharp() {
        return Err(Error::WrongMeshKind { expected: "thin-fault (eps > 0)" });
    }
    if coeffs.len() != disc.dofs().n_dofs() {
        return Err(Error::DimensionMismatch { expected: disc.dofs().n_dofs(), found: coeffs.len() });
    }
    let eps = mesh.eps();
    let quad = ElementQuadrature::new(NORM_ORDER)?;
    let mut lhs = [T::zero(); 3];
    for (e, el) in mesh.elements().iter().enumerate() {
        let bulk = el.region == Region::Bulk;
        for q in 0..quad.len() {
            let [xi, eta] = quad.reference_point(q);
            let p = disc.eval(coeffs, e, xi, eta);
            let w = quad.eval(el, q).jxw;
            let g = p.grad;
            let mut first = g[0][0].powi(2) + g[1][1].powi(2);
            if bulk {
                first += g[0][1].powi(2) + g[1][0].powi(2);
            }
            lhs[0] += w * first;
            lhs[1] += w * eps * (g[1][0].powi(2) + g[0][1].powi(2));
            lhs[2] += w * (p.u[0].powi(2) + p.u[1].powi(2));
        }
    }
    let energy = energy_with_scaling(disc, mat, coeffs, Slip::Given(gamma), false, T::half())?;
    let rule = GaussRule1d::new(NORM_ORDER)?;
    let gamma_sq = composite(&rule, -T::one(), T::one(), mesh.columns()).into_iter().map(|(x, w)| w * gamma(x).powi(2)).sum();
    Ok(CoercivityTerms { lhs, energy, gamma_sq })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivityCheck<T> {
    pub lhs: [T; 3],
    pub rhs: [T; 3],
    pub pass: [bool; 3],
}

/// The three bounds with the constants `c`.
pub fn coercivity_check<T: Real>(
    disc: &Discretization<T>,
    coeffs: &[T],
    gamma: LineFunction<'_, T>,
    mat: &MaterialField<T>,
    c: [T; 3],
) -> Result<CoercivityCheck<T>> {
    let terms = coercivity_terms(disc, coeffs, gamma, mat)?;
    let b = terms.bases();
    let mut rhs = [T::zero(); 3];
    let mut pass = [false; 3];
    for k in 0..3 {
        rhs[k] = c[k] * b[k];
        pass[k] = terms.lhs[k] <= rhs[k] * (T::one() + T::lit(1e-12)) + T::lit(1e-14);
    }
    Ok(CoercivityCheck { lhs: terms.lhs, rhs, pass })
}

/// Random displacement vanishing on `y = +-1`: smooth modes plus a ramp
/// carrying a jump `J(x)` across the strip, and a slip close to `J` or not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivitySample {
    u1: [TestFunction; 2],
    u2: [TestFunction; 2],
    jump: (f64, Modulation),
    slip: (f64, f64, Modulation),
}

impl CoercivitySample {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let u1 = [TestFunction::random(rng), TestFunction::random(rng)];
        let u2 = [TestFunction::random(rng), TestFunction::random(rng)];
        let jump = (rng.gen_range(0.0..2.0), Modulation::random(rng));
        let follow = if rng.gen_bool(0.5) { 1.0 } else { rng.gen_range(-1.0..1.0) };
        let slip = (follow, rng.gen_range(0.0..1.5), Modulation::random(rng));
        Self { u1, u2, jump, slip }
    }

    fn jump_at(&self, x: f64) -> f64 {
        self.jump.0 * self.jump.1.eval(x).0
    }

    /// Piecewise linear in `y`, `0` at `y = +-1`, `+-1/2` at `y = +-eps/2`.
    fn ramp(eps: f64, y: f64) -> f64 {
        let h = 0.5 * eps;
        if y > h {
            0.5 * (1.0 - y) / (1.0 - h)
        } else if y < -h {
            -0.5 * (1.0 + y) / (1.0 - h)
        } else {
            y / eps
        }
    }

    pub fn displacement(&self, eps: f64, x: f64, y: f64) -> [f64; 2] {
        let u1 = self.u1.iter().map(|f| f.eval(x, y).0).sum::<f64>() + self.jump_at(x) * Self::ramp(eps, y);
        [u1, self.u2.iter().map(|f| f.eval(x, y).0).sum()]
    }

    pub fn gamma(&self, x: f64) -> f64 {
        self.slip.0 * self.jump_at(x) + self.slip.1 * self.slip.2.eval(x).0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivityRow {
    pub eps: f64,
    pub sample: usize,
    pub ratios: [f64; 3],
    pub pass: [bool; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoercivityAudit {
    /// Frozen constants: `margin` times the largest calibration ratio.
    pub constants: [f64; 3],
    pub rows: Vec<CoercivityRow>,
}

impl CoercivityAudit {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass.iter().all(|&p| p))
    }
}

fn sample_terms(sample: &CoercivitySample, eps: f64, n: usize, coeffs: &Coefficients<f64>) -> Result<CoercivityTerms<f64>> {
    let disc = Discretization::new(n, FaultGeometry::new(eps)?, false)?;
    let mat = MaterialField::uniform(*coeffs, disc.mesh())?;
    let v = disc.interpolate(&|x, y, _| sample.displacement(eps, x, y), None);
    coercivity_terms(&disc, &v, &|x| sample.gamma(x), &mat)
}

/// Calibrates the constants on `samples` fields at the widest fault of
/// `eps_list`, then checks fields drawn from `test_seed` at every `eps`
/// against them. Meshes have index `n`.
pub fn coercivity_audit(
    calibration_seed: u64,
    test_seed: u64,
    samples: usize,
    eps_list: &[f64],
    n: usize,
    coeffs: &Coefficients<f64>,
    margin: f64,
) -> Result<CoercivityAudit> {
    if calibration_seed == test_seed {
        return Err(Error::InvalidConfig("calibration and test seeds must differ".into()));
    }
    let widest = eps_list.iter().copied().fold(f64::NAN, f64::max);
    if !widest.is_finite() || samples == 0 || margin.is_nan() || margin < 1.0 {
        return Err(Error::InvalidConfig("coercivity audit needs eps values, samples and a margin >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(calibration_seed);
    let mut constants = [0.0f64; 3];
    for _ in 0..samples {
        let r = sample_terms(&CoercivitySample::random(&mut rng), widest, n, coeffs)?.ratios();
        for k in 0..3 {
            constants[k] = constants[k].max(margin * r[k]);
        }
    }
    let mut rows = Vec::with_capacity(samples * eps_list.len());
    for &eps in eps_list {
        let mut rng = ChaCha8Rng::seed_from_u64(test_seed);
        for sample in 0..samples {
            let r = sample_terms(&CoercivitySample::random(&mut rng), eps, n, coeffs)?.ratios();
            let pass = [r[0] <= constants[0], r[1] <= constants[1], r[2] <= constants[2]];
            rows.push(CoercivityRow { eps, sample, ratios: r, pass });
        }
    }
    Ok(CoercivityAudit { constants, rows })
}
