//! Numerical checks of the analysis: Poincaré and coercivity inequalities,
//! the recovery lifting and convergence of energies, and the plasticity
//! identity behind the slip law.

mod gamma;
mod inequalities;
mod lift;
mod plasticity;

pub use gamma::{gamma_limit_audit, gaps_pass, lifted_energy, limit_energy, GammaRow};
pub use inequalities::{
    coercivity_audit, coercivity_check, coercivity_terms, poincare_audit, poincare_check, CoercivityAudit, CoercivityCheck, CoercivityRow,
    CoercivitySample, CoercivityTerms, InequalityCheck, PoincareRow, ScalarField, TestFunction,
};
pub use lift::{recovery_lift, Lifted};
pub use plasticity::{
    axial, cross_rowwise, curl_curl_ansatz, curl_rowwise, defect_velocity, defect_velocity_ansatz, plasticity_lemma_residual, GridAxis,
    GridFunction3, Mat3, PlasticityData,
};

use crate::fem::quadrature::GaussRule1d;
use crate::scalar::Real;

/// Composite Gauss points and weights on `[a, b]` split into `cells` cells.
pub(crate) fn composite<T: Real>(rule: &GaussRule1d<T>, a: T, b: T, cells: usize) -> Vec<(T, T)> {
    let h = (b - a) / T::from_usize_lossy(cells);
    (0..cells)
        .flat_map(|c| {
            let x0 = a + h * T::from_usize_lossy(c);
            rule.mapped(x0, x0 + h).collect::<Vec<_>>()
        })
        .collect()
}

/// Sums `f(x, y) w` over the tensor product of two composite rules.
pub(crate) fn integrate2<T: Real>(xs: &[(T, T)], ys: &[(T, T)], mut f: impl FnMut(T, T) -> T) -> T {
    let mut sum = T::zero();
    for &(x, wx) in xs {
        for &(y, wy) in ys {
            sum += wx * wy * f(x, y);
        }
    }
    sum
}
