//! Lifting of sharp-interface displacements to thin-fault configurations.

use crate::error::{Error, Result};
use crate::fem::quadrature::GaussRule1d;
use crate::field::Discretization;
use crate::geometry::{FaultGeometry, Side};
use crate::manufactured::ExactSolution;
use crate::scalar::Real;

/// Points of the discrete mollifier in `x`.
const MOLLIFIER_POINTS: usize = 8;

/// `u1` pulled back by the piecewise affine map onto `Omega_0` outside the
/// strip and interpolated linearly in `y` across it; `u2` unchanged. With
/// mollification, `u1` is first averaged in `x` over a radius `sqrt(eps)`,
/// which preserves `u = 0` on `y = +-1`; the base field is then evaluated
/// (as its own smooth extension) up to `|x| = 1 + sqrt(eps)`.
pub struct Lifted<'a, T> {
    base: &'a dyn ExactSolution<T>,
    eps: T,
    kernel: Option<(T, Vec<(T, T)>)>,
}

impl<'a, T: Real> Lifted<'a, T> {
    pub fn new(base: &'a dyn ExactSolution<T>, eps: T) -> Result<Self> {
        FaultGeometry::new(eps)?;
        if eps == T::zero() {
            return Err(Error::InvalidGeometry("lifting needs eps > 0".into()));
        }
        Ok(Self { base, eps, kernel: None })
    }

    pub fn mollified(mut self) -> Result<Self> {
        let rule = GaussRule1d::<T>::new(MOLLIFIER_POINTS)?;
        let bump = |s: T| (-T::one() / (T::one() - s * s)).exp();
        let mut nodes: Vec<(T, T)> = rule.points.iter().zip(&rule.weights).map(|(&s, &w)| (s, w * bump(s))).collect();
        let total: T = nodes.iter().map(|n| n.1).sum();
        for n in &mut nodes {
            n.1 /= total;
        }
        self.kernel = Some((self.eps.sqrt(), nodes));
        Ok(self)
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    /// `(u1, d u1/dx, d u1/dy)` of the (mollified) base field.
    fn first(&self, x: T, y: T, side: Side) -> [T; 3] {
        let eval = |x: T| {
            let u = self.base.displacement(x, y, side)[0];
            let g = self.base.gradient(x, y, side)[0];
            [u, g[0], g[1]]
        };
        match &self.kernel {
            None => eval(x),
            Some((r, nodes)) => {
                let mut acc = [T::zero(); 3];
                for &(s, w) in nodes {
                    let v = eval(x - *r * s);
                    for k in 0..3 {
                        acc[k] += w * v[k];
                    }
                }
                acc
            }
        }
    }

    /// Band coordinate: `(y on Omega_0, dpsi/dy, side)` outside the strip.
    fn pull_back(&self, y: T) -> Option<(T, T, Side)> {
        let h = self.eps * T::half();
        let scale = T::one() / (T::one() - h);
        if y >= h {
            Some(((y - h) * scale, scale, Side::Plus))
        } else if y <= -h {
            Some(((y + h) * scale, scale, Side::Minus))
        } else {
            None
        }
    }

    /// Weight of the upper trace at height `y` in the strip.
    fn weight(&self, y: T) -> T {
        T::half() + y / self.eps
    }
}

impl<T: Real> ExactSolution<T> for Lifted<'_, T> {
    fn displacement(&self, x: T, y: T, _: Side) -> [T; 2] {
        let u2 = self.base.displacement(x, y, Side::of(y))[1];
        let u1 = match self.pull_back(y) {
            Some((yb, _, side)) => self.first(x, yb, side)[0],
            None => {
                let t = self.weight(y);
                t * self.first(x, T::zero(), Side::Plus)[0] + (T::one() - t) * self.first(x, T::zero(), Side::Minus)[0]
            }
        };
        [u1, u2]
    }

    fn gradient(&self, x: T, y: T, _: Side) -> [[T; 2]; 2] {
        let g2 = self.base.gradient(x, y, Side::of(y))[1];
        let g1 = match self.pull_back(y) {
            Some((yb, dpsi, side)) => {
                let f = self.first(x, yb, side);
                [f[1], f[2] * dpsi]
            }
            None => {
                let t = self.weight(y);
                let p = self.first(x, T::zero(), Side::Plus);
                let m = self.first(x, T::zero(), Side::Minus);
                [t * p[1] + (T::one() - t) * m[1], (p[0] - m[0]) / self.eps]
            }
        };
        [g1, g2]
    }

    fn slip(&self, x: T) -> Option<T> {
        self.base.slip(x)
    }
}

/// Nodal interpolant of the lifted field on the thin-fault mesh of index `n`.
pub fn recovery_lift<T: Real>(u: &dyn ExactSolution<T>, eps: T, n: usize, mollify: bool) -> Result<(Discretization<T>, Vec<T>)> {
    let mut lift = Lifted::new(u, eps)?;
    if mollify {
        lift = lift.mollified()?;
    }
    let disc = Discretization::new(n, FaultGeometry::new(eps)?, false)?;
    let coeffs = disc.interpolate(&|x, y, s| lift.displacement(x, y, s), None);
    Ok((disc, coeffs))
}
