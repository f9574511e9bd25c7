//! Isotropic plane elasticity at a point.

use crate::scalar::Real;

/// Stored energy `W(A) = mu (A11^2 + A22^2) + lambda/2 (A11 + A22)^2 + mu/2 (A12 + A21)^2`
/// of a displacement gradient `A` (row `i` = component, column `j` = derivative).
pub fn strain_energy_density<T: Real>(a: &[[T; 2]; 2], mu: T, lambda: T) -> T {
    let tr = a[0][0] + a[1][1];
    let shear = a[0][1] + a[1][0];
    mu * (a[0][0] * a[0][0] + a[1][1] * a[1][1]) + T::half() * lambda * tr * tr + T::half() * mu * shear * shear
}

/// Cauchy stress `C(A) = 2 mu sym(A) + lambda tr(A) I`.
pub fn stress<T: Real>(a: &[[T; 2]; 2], mu: T, lambda: T) -> [[T; 2]; 2] {
    let tr = a[0][0] + a[1][1];
    let s12 = mu * (a[0][1] + a[1][0]);
    [[T::two() * mu * a[0][0] + lambda * tr, s12], [s12, T::two() * mu * a[1][1] + lambda * tr]]
}

/// `|sym(A)|^2`.
pub fn sym_norm2<T: Real>(a: &[[T; 2]; 2]) -> T {
    let s = (a[0][1] + a[1][0]) * T::half();
    a[0][0] * a[0][0] + a[1][1] * a[1][1] + T::two() * s * s
}

/// Gradient whose stored energy is the fault energy density: shear entries
/// scaled by `eps^theta` and the slip entering as `gamma eps^(theta - 1)`.
/// With `theta = 1/2`, `W` of the result is
/// `W(u1x, 0; 0, u2y) + mu/(2 eps) (eps (u1y + u2x) - gamma)^2`.
pub fn fault_gradient<T: Real>(a: &[[T; 2]; 2], gamma: T, eps: T, theta: T) -> [[T; 2]; 2] {
    let s = eps.powf(theta);
    let g = gamma * eps.powf(theta - T::one());
    [[a[0][0], s * a[0][1] - g], [s * a[1][0], a[1][1]]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_and_uniaxial() {
        assert_eq!(strain_energy_density(&[[0.0; 2]; 2], 1.0, 2.0), 0.0);
        assert_eq!(strain_energy_density(&[[1.0, 0.0], [0.0, 0.0]], 1.0, 2.0), 2.0);
    }

    #[test]
    fn stress_is_energy_gradient() {
        let a = [[0.3, -0.7], [0.2, 1.1]];
        let (mu, lambda) = (1.3f64, 0.4);
        let s = stress(&a, mu, lambda);
        let h = 1e-6f64;
        for i in 0..2 {
            for j in 0..2 {
                let mut p = a;
                let mut m = a;
                p[i][j] += h;
                m[i][j] -= h;
                let fd = (strain_energy_density(&p, mu, lambda) - strain_energy_density(&m, mu, lambda)) / (2.0 * h);
                assert!((fd - s[i][j]).abs() < 1e-8);
            }
        }
    }

    proptest! {
        #[test]
        fn antisymmetric_gradients_cost_nothing(w in -10.0f64..10.0, mu in 0.1f64..5.0, lambda in -0.05f64..5.0) {
            let a = [[0.0, w], [-w, 0.0]];
            prop_assert!(strain_energy_density(&a, mu, lambda).abs() < 1e-12);
        }

        #[test]
        fn coercive_on_symmetric_part(
            a in proptest::array::uniform4(-3.0f64..3.0),
            mu in 0.1f64..5.0,
            lambda in -0.09f64..5.0,
        ) {
            let a = [[a[0], a[1]], [a[2], a[3]]];
            let c0 = mu.min(mu + lambda);
            let w = strain_energy_density(&a, mu, lambda);
            prop_assert!(w >= 0.0);
            // 2 W(A) = C(A):A >= 2 c0 |sym A|^2
            prop_assert!(2.0 * w >= 2.0 * c0 * sym_norm2(&a) - 1e-12);
        }
    }

    #[test]
    fn fault_gradient_expansion() {
        let a = [[0.3f64, -1.2], [0.7, 0.4]];
        let (mu, lambda, eps, gamma) = (1.5, 2.0, 0.1, 0.8);
        let w = strain_energy_density(&fault_gradient(&a, gamma, eps, 0.5), mu, lambda);
        let normal = strain_energy_density(&[[a[0][0], 0.0], [0.0, a[1][1]]], mu, lambda);
        let s = a[0][1] + a[1][0];
        let expect = normal + mu / (2.0 * eps) * (eps * s - gamma).powi(2);
        assert!((w - expect).abs() < 1e-13);
    }
}
