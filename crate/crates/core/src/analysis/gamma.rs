//! Convergence of the thin-fault energies on the recovery sequence.

use super::lift::Lifted;
use super::{composite, integrate2};
use crate::error::{Error, Result};
use crate::fem::assembly::LineFunction;
use crate::fem::elasticity::{fault_gradient, strain_energy_density};
use crate::fem::quadrature::GaussRule1d;
use crate::geometry::Side;
use crate::manufactured::ExactSolution;
use crate::material::Coefficients;
use crate::scalar::Real;

const RULE: usize = 6;
const CELLS: usize = 24;
const STRIP_CELLS: usize = 2;

/// `int_{Omega_0} W(grad u) + 1/2 int mu ([u1] - gamma)^2`.
pub fn limit_energy<T: Real>(u: &dyn ExactSolution<T>, gamma: LineFunction<'_, T>, c: &Coefficients<T>) -> Result<T> {
    let rule = GaussRule1d::new(RULE)?;
    let xs = composite(&rule, -T::one(), T::one(), CELLS);
    let mut total = T::zero();
    for (side, a, b) in [(Side::Minus, -T::one(), T::zero()), (Side::Plus, T::zero(), T::one())] {
        let ys = composite(&rule, a, b, CELLS);
        total += integrate2(&xs, &ys, |x, y| strain_energy_density(&u.gradient(x, y, side), c.mu, c.lambda));
    }
    for &(x, w) in &xs {
        let jump = u.displacement(x, T::zero(), Side::Plus)[0] - u.displacement(x, T::zero(), Side::Minus)[0];
        total += w * T::half() * c.mu * (jump - gamma(x)).powi(2);
    }
    Ok(total)
}

/// Thin-fault energy of the lifted field with the fault gradient scaled by
/// `eps^theta` (`theta = 1/2` is the energy of the model).
pub fn lifted_energy<T: Real>(lift: &Lifted<'_, T>, gamma: LineFunction<'_, T>, c: &Coefficients<T>, theta: T) -> Result<T> {
    let eps = lift.eps();
    let h = eps * T::half();
    let rule = GaussRule1d::new(RULE)?;
    let xs = composite(&rule, -T::one(), T::one(), CELLS);
    let bulk = |x: T, y: T| strain_energy_density(&lift.gradient(x, y, Side::of(y)), c.mu, c.lambda);
    let mut total = integrate2(&xs, &composite(&rule, -T::one(), -h, CELLS), bulk) + integrate2(&xs, &composite(&rule, h, T::one(), CELLS), bulk);
    total += integrate2(&xs, &composite(&rule, -h, h, STRIP_CELLS), |x, y| {
        let a = fault_gradient(&lift.gradient(x, y, Side::of(y)), gamma(x), eps, theta);
        strain_energy_density(&a, c.mu, c.lambda)
    });
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRow {
    pub eps: f64,
    /// Thin-fault energy of the lifted field.
    pub lifted: f64,
    pub limit: f64,
    pub gap: f64,
}

/// `|I_eps(lift u) - I(u)|` for each `eps` (fault scaling `eps^theta`).
pub fn gamma_limit_audit<T: Real>(
    u: &dyn ExactSolution<T>,
    gamma: LineFunction<'_, T>,
    c: &Coefficients<T>,
    eps_list: &[T],
    theta: T,
    mollify: bool,
) -> Result<Vec<GammaRow>> {
    c.validate()?;
    if eps_list.is_empty() {
        return Err(Error::InvalidConfig("no eps values to audit".into()));
    }
    let limit = limit_energy(u, gamma, c)?;
    eps_list
        .iter()
        .map(|&eps| {
            let mut lift = Lifted::new(u, eps)?;
            if mollify {
                lift = lift.mollified()?;
            }
            let lifted = lifted_energy(&lift, gamma, c, theta)?;
            Ok(GammaRow {
                eps: eps.to_f64_lossy(),
                lifted: lifted.to_f64_lossy(),
                limit: limit.to_f64_lossy(),
                gap: (lifted - limit).abs().to_f64_lossy(),
            })
        })
        .collect()
}

/// Gaps strictly decreasing with the last below a quarter of the first.
pub fn gaps_pass(rows: &[GammaRow]) -> bool {
    match (rows.first(), rows.last()) {
        (Some(f), Some(l)) if rows.len() > 1 => rows.windows(2).all(|w| w[1].gap < w[0].gap) && l.gap < 0.25 * f.gap,
        _ => false,
    }
}
