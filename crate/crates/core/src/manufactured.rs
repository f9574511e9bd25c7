//! Exact solutions with their data, and error norms of discrete fields.

use crate::error::{Error, Result};
use crate::fem::assembly::{segment_points, ElementQuadrature, NORM_ORDER};
use crate::fem::elasticity::stress;
use crate::fem::quadrature::GaussRule1d;
use crate::field::Discretization;
use crate::geometry::Side;
use crate::material::Coefficients;
use crate::scalar::Real;

/// A displacement field, possibly discontinuous across `y = 0`, with its
/// gradient and an optional slip.
pub trait ExactSolution<T: Real> {
    fn displacement(&self, x: T, y: T, side: Side) -> [T; 2];

    /// `grad[i][j] = d u_i / d x_j`.
    fn gradient(&self, x: T, y: T, side: Side) -> [[T; 2]; 2];

    fn slip(&self, _x: T) -> Option<T> {
        None
    }
}

/// The piecewise smooth limit solution
/// `u = 1/2 (s e^{a(x - s y)}, e^{a(x - s kappa y)}) + (phi_y, -phi_x)`,
/// `s = sign(y)`, `phi = e^{-ell y} cos(ell x)`, `kappa = lambda / (2 mu + lambda)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manufactured<T> {
    pub a: T,
    pub ell: T,
    pub kappa: T,
    pub coeffs: Coefficients<T>,
    /// Weight of the exponential part (1 for the full solution).
    pub exponential: T,
}

/// Second derivatives `[u_xx, u_xy, u_yy]` of both components.
type Hessian<T> = [[T; 3]; 2];

impl<T: Real> Manufactured<T> {
    /// `a = 1/2`, `ell = 1/4`.
    pub fn new(coeffs: Coefficients<T>) -> Result<Self> {
        Self::with_params(T::half(), T::lit(0.25), coeffs)
    }

    pub fn reference() -> Self {
        Self::new(Coefficients::reference()).expect("reference coefficients are valid")
    }

    pub fn with_params(a: T, ell: T, coeffs: Coefficients<T>) -> Result<Self> {
        coeffs.validate()?;
        if !(a.is_finite() && ell.is_finite()) {
            return Err(Error::InvalidConfig("manufactured parameters must be finite".into()));
        }
        Ok(Self { a, ell, kappa: coeffs.kappa(), coeffs, exponential: T::one() })
    }

    /// The divergence-free part `(phi_y, -phi_x)` alone.
    pub fn potential_only(mut self) -> Self {
        self.exponential = T::zero();
        self
    }

    fn exps(&self, x: T, y: T, side: Side) -> (T, T, T) {
        let s: T = side.sign();
        let e1 = (self.a * (x - s * y)).exp() * self.exponential;
        let e2 = (self.a * (x - s * self.kappa * y)).exp() * self.exponential;
        (s, e1, e2)
    }

    fn trig(&self, x: T, y: T) -> (T, T, T) {
        let l = self.ell;
        ((-l * y).exp(), (l * x).cos(), (l * x).sin())
    }

    pub fn exact_u0(&self, x: T, y: T, side: Side) -> [T; 2] {
        let (s, e1, e2) = self.exps(x, y, side);
        let (psi, c, sn) = self.trig(x, y);
        let l = self.ell;
        [T::half() * s * e1 - l * psi * c, T::half() * e2 + l * psi * sn]
    }

    pub fn gradient_u0(&self, x: T, y: T, side: Side) -> [[T; 2]; 2] {
        let (s, e1, e2) = self.exps(x, y, side);
        let (psi, c, sn) = self.trig(x, y);
        let (a, k, l2) = (self.a, self.kappa, self.ell * self.ell);
        let h = T::half();
        [[h * s * a * e1 + l2 * psi * sn, -h * a * e1 + l2 * psi * c], [h * a * e2 + l2 * psi * c, -h * s * k * a * e2 - l2 * psi * sn]]
    }

    fn hessian_u0(&self, x: T, y: T, side: Side) -> Hessian<T> {
        let (s, e1, e2) = self.exps(x, y, side);
        let (psi, c, sn) = self.trig(x, y);
        let (a2, k) = (self.a * self.a, self.kappa);
        let l3 = self.ell * self.ell * self.ell;
        let h = T::half();
        [
            [h * s * a2 * e1 + l3 * psi * c, -h * a2 * e1 - l3 * psi * sn, h * s * a2 * e1 - l3 * psi * c],
            [h * a2 * e2 - l3 * psi * sn, -h * s * k * a2 * e2 - l3 * psi * c, h * k * k * a2 * e2 + l3 * psi * sn],
        ]
    }

    pub fn stress_u0(&self, x: T, y: T, side: Side) -> [[T; 2]; 2] {
        stress(&self.gradient_u0(x, y, side), self.coeffs.mu, self.coeffs.lambda)
    }

    /// `[u1] = e^{ax}` (scaled by the exponential weight).
    pub fn jump(&self, x: T) -> T {
        self.exact_u0(x, T::zero(), Side::Plus)[0] - self.exact_u0(x, T::zero(), Side::Minus)[0]
    }

    /// `gamma = [u1] - C(grad u)_12 / mu = e^{ax} - 2 ell^2 cos(ell x)`.
    pub fn exact_gamma0(&self, x: T) -> T {
        self.exponential * (self.a * x).exp() - T::two() * self.ell * self.ell * (self.ell * x).cos()
    }

    pub fn gamma0_xx(&self, x: T) -> T {
        let l = self.ell;
        self.exponential * self.a * self.a * (self.a * x).exp() + T::two() * l * l * l * l * (l * x).cos()
    }

    /// `f = -div C(grad u)` from the analytic second derivatives.
    pub fn manufactured_f(&self, x: T, y: T, side: Side) -> [T; 2] {
        let [h1, h2] = self.hessian_u0(x, y, side);
        let (mu, lambda) = (self.coeffs.mu, self.coeffs.lambda);
        let p = T::two() * mu + lambda;
        // div sigma_1 = (2mu+lambda) u1xx + lambda u2xy + mu (u1yy + u2xy)
        let d1 = p * h1[0] + lambda * h2[1] + mu * (h1[2] + h2[1]);
        // div sigma_2 = mu (u1xy + u2xx) + lambda u1xy + (2mu+lambda) u2yy
        let d2 = mu * (h1[1] + h2[0]) + lambda * h1[1] + p * h2[2];
        [-d1, -d2]
    }

    /// `f0 = eta_hat gamma - C(grad u)_12 - nu gamma_xx` on `y = 0`.
    pub fn manufactured_f0(&self, x: T) -> T {
        let t12 = self.stress_u0(x, T::zero(), Side::Plus)[0][1];
        self.coeffs.eta_hat * self.exact_gamma0(x) - t12 - self.coeffs.nu * self.gamma0_xx(x)
    }
}

impl<T: Real> ExactSolution<T> for Manufactured<T> {
    fn displacement(&self, x: T, y: T, side: Side) -> [T; 2] {
        self.exact_u0(x, y, side)
    }

    fn gradient(&self, x: T, y: T, side: Side) -> [[T; 2]; 2] {
        self.gradient_u0(x, y, side)
    }

    fn slip(&self, x: T) -> Option<T> {
        Some(self.exact_gamma0(x))
    }
}

/// Edge dislocation at the origin with slip `[u1] = 1` on `x < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dislocation<T> {
    pub coeffs: Coefficients<T>,
}

impl<T: Real> Dislocation<T> {
    pub fn new(coeffs: Coefficients<T>) -> Result<Self> {
        coeffs.validate()?;
        Ok(Self { coeffs })
    }

    /// Angle with the branch cut on the negative x-axis; `side` picks the
    /// limit on the cut.
    fn angle(x: T, y: T, side: Side) -> T {
        if y == T::zero() && x < T::zero() {
            T::PI() * side.sign()
        } else {
            y.atan2(x)
        }
    }

    fn check(x: T, y: T) -> Result<()> {
        if x == T::zero() && y == T::zero() {
            return Err(Error::OutOfDomain { x: 0.0, y: 0.0 });
        }
        Ok(())
    }

    pub fn dislocation_u(&self, x: T, y: T, side: Side) -> Result<[T; 2]> {
        Self::check(x, y)?;
        let nu = self.coeffs.poisson_ratio();
        let r2 = x * x + y * y;
        let pi2 = T::two() * T::PI();
        let u1 = (Self::angle(x, y, side) + x * y / (T::two() * (T::one() - nu) * r2)) / pi2;
        let u2 = -((T::one() - T::two() * nu) * r2.ln() + (x * x - y * y) / r2) / (T::lit(8.0) * T::PI() * (T::one() - nu));
        Ok([u1, u2])
    }

    pub fn dislocation_gradient(&self, x: T, y: T) -> Result<[[T; 2]; 2]> {
        Self::check(x, y)?;
        let (mu, lambda) = (self.coeffs.mu, self.coeffs.lambda);
        let r2 = x * x + y * y;
        let d = T::two() * T::PI() * (lambda + T::two() * mu) * r2 * r2;
        let m = T::two() * lambda + T::lit(3.0) * mu;
        let (x2, y2) = (x * x, y * y);
        Ok([
            [-y * (m * x2 + mu * y2) / d, x * (m * x2 + mu * y2) / d],
            [-x * (mu * x2 + m * y2) / d, y * ((T::two() * lambda + mu) * x2 - mu * y2) / d],
        ])
    }

    pub fn dislocation_stress(&self, x: T, y: T) -> Result<[[T; 2]; 2]> {
        Ok(stress(&self.dislocation_gradient(x, y)?, self.coeffs.mu, self.coeffs.lambda))
    }

    /// `[u1](x)`: 1 on the slipped half-line `x < 0`.
    pub fn jump(&self, x: T) -> T {
        if x < T::zero() {
            T::one()
        } else {
            T::zero()
        }
    }

    /// `T12(x, 0) = mu (lambda + mu) / (pi (lambda + 2 mu) x)`.
    fn shear_on_axis(&self, x: T) -> T {
        let (mu, lambda) = (self.coeffs.mu, self.coeffs.lambda);
        mu * (lambda + mu) / (T::PI() * (lambda + T::two() * mu) * x)
    }

    /// Slip `[u1] - T12 / mu` matching the interface law.
    pub fn gamma(&self, x: T) -> Result<T> {
        Self::check(x, T::zero())?;
        Ok(self.jump(x) - self.shear_on_axis(x) / self.coeffs.mu)
    }

    /// `f0 = eta_hat gamma - T12(x, 0)` with `nu = 0`:
    /// `eta_hat [u1] - (lambda + mu)(eta_hat + mu) / (pi (2 mu + lambda) x)`.
    pub fn dislocation_f0(&self, x: T) -> Result<T> {
        let g = self.gamma(x)?;
        Ok(self.coeffs.eta_hat * g - self.shear_on_axis(x))
    }
}

impl<T: Real> ExactSolution<T> for Dislocation<T> {
    fn displacement(&self, x: T, y: T, side: Side) -> [T; 2] {
        self.dislocation_u(x, y, side).unwrap_or([T::nan(); 2])
    }

    fn gradient(&self, x: T, y: T, _side: Side) -> [[T; 2]; 2] {
        self.dislocation_gradient(x, y).unwrap_or([[T::nan(); 2]; 2])
    }

    fn slip(&self, x: T) -> Option<T> {
        self.gamma(x).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    /// `|u - u_h|` in `L2(Omega)`.
    pub l2_u: f64,
    /// `|u - u_h|` in `H1(Omega_0)`: `L2` plus gradient, elementwise.
    pub h1_u: f64,
    /// `|gamma - gamma_h|` in `L2(-1, 1)`, when compared.
    pub l2_gamma: Option<f64>,
    /// Unknowns of the discrete problem (free dofs).
    pub ndofs: usize,
    /// Mesh size `1/n`, the node spacing.
    pub h: f64,
}

/// Element-wise norms of `exact - u_h`; slip error only with `compare_gamma`.
pub fn error_norms<T: Real>(disc: &Discretization<T>, coeffs: &[T], exact: &dyn ExactSolution<T>, compare_gamma: bool) -> Result<ErrorReport> {
    let (mesh, dofs) = (disc.mesh(), disc.dofs());
    if coeffs.len() != dofs.n_dofs() {
        return Err(Error::DimensionMismatch { expected: dofs.n_dofs(), found: coeffs.len() });
    }
    let quad = ElementQuadrature::new(NORM_ORDER)?;
    let mut l2 = T::zero();
    let mut semi = T::zero();
    for (e, el) in mesh.elements().iter().enumerate() {
        for q in 0..quad.len() {
            let [xi, eta] = quad.reference_point(q);
            let w = quad.eval(el, q).jxw;
            let p = disc.eval(coeffs, e, xi, eta);
            let side = el.side_at(p.y);
            let u = exact.displacement(p.x, p.y, side);
            let g = exact.gradient(p.x, p.y, side);
            for i in 0..2 {
                l2 += w * (u[i] - p.u[i]).powi(2);
                for j in 0..2 {
                    semi += w * (g[i][j] - p.grad[i][j]).powi(2);
                }
            }
        }
    }
    let l2_gamma = if compare_gamma {
        let mut sum = T::zero();
        slip_quadrature(disc, coeffs, |x, gh, w| {
            let g = exact.slip(x).ok_or_else(|| Error::InvalidConfig("exact solution has no slip".into()))?;
            sum += w * (g - gh).powi(2);
            Ok(())
        })?;
        Some(sum.sqrt().to_f64_lossy())
    } else {
        None
    };
    Ok(ErrorReport {
        l2_u: l2.sqrt().to_f64_lossy(),
        h1_u: (l2 + semi).sqrt().to_f64_lossy(),
        l2_gamma,
        ndofs: dofs.n_free(),
        h: mesh.h().to_f64_lossy(),
    })
}

/// `|gamma_h|` in `L2(-1, 1)`.
pub fn slip_norm<T: Real>(disc: &Discretization<T>, coeffs: &[T]) -> Result<T> {
    let mut sum = T::zero();
    slip_quadrature(disc, coeffs, |_, g, w| {
        sum += w * g * g;
        Ok(())
    })?;
    Ok(sum.sqrt())
}

/// Visits `(x, gamma_h(x), weight)` at 5 Gauss points per segment.
fn slip_quadrature<T: Real>(disc: &Discretization<T>, coeffs: &[T], mut visit: impl FnMut(T, T, T) -> Result<()>) -> Result<()> {
    let (mesh, dofs) = (disc.mesh(), disc.dofs());
    if !dofs.has_gamma() {
        return Err(Error::InvalidConfig("field has no slip dofs".into()));
    }
    let rule = GaussRule1d::new(NORM_ORDER)?;
    let xs = mesh.node_columns();
    for c in 0..mesh.columns() {
        let g = dofs.segment_gamma_dofs(c).expect("slip dofs checked");
        for p in segment_points(&rule, xs[2 * c], xs[2 * c + 2]) {
            let gh = (0..3).fold(T::zero(), |s, a| s + coeffs[g[a]] * p.m[a]);
            visit(p.x, gh, p.w)?;
        }
    }
    Ok(())
}

/// Norms of an exact solution over `Omega_0` by `order`-point Gauss rules on
/// a `2m x 2m` grid of cells: `(|u|_L2, |u|_H1, |gamma|_L2(-1,1))`.
pub fn exact_norms<T: Real>(exact: &dyn ExactSolution<T>, m: usize, order: usize) -> Result<(T, T, Option<T>)> {
    if m == 0 {
        return Err(Error::MeshTooCoarse { n: m, reason: "at least one cell per half-width".into() });
    }
    let rule = GaussRule1d::<T>::new(order)?;
    let h = T::one() / T::from_usize_lossy(m);
    let mut l2 = T::zero();
    let mut semi = T::zero();
    let mut gamma = Some(T::zero());
    for i in 0..2 * m {
        let x0 = -T::one() + T::from_usize_lossy(i) * h;
        let px: Vec<(T, T)> = rule.mapped(x0, x0 + h).collect();
        for j in 0..2 * m {
            let y0 = -T::one() + T::from_usize_lossy(j) * h;
            let side = if j < m { Side::Minus } else { Side::Plus };
            let py: Vec<(T, T)> = rule.mapped(y0, y0 + h).collect();
            for &(x, wx) in &px {
                for &(y, wy) in &py {
                    let u = exact.displacement(x, y, side);
                    let g = exact.gradient(x, y, side);
                    l2 += wx * wy * (u[0] * u[0] + u[1] * u[1]);
                    semi += wx * wy * (g[0][0] * g[0][0] + g[0][1] * g[0][1] + g[1][0] * g[1][0] + g[1][1] * g[1][1]);
                }
            }
        }
        for &(x, w) in &px {
            gamma = match (gamma, exact.slip(x)) {
                (Some(s), Some(g)) => Some(s + w * g * g),
                _ => None,
            };
        }
    }
    Ok((l2.sqrt(), (l2 + semi).sqrt(), gamma.map(|g| g.sqrt())))
}
