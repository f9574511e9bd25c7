//! Quadratic Lagrange bases: the three-node line element and the nine-node
//! biquadratic quadrilateral.
//!
//! Local node `k` of the quadrilateral sits at reference position
//! `(xi_i, eta_j)` with `k = 3 j + i` and `xi_0 = -1, xi_1 = 0, xi_2 = 1`,
//! so corners are `0, 2, 6, 8`, edge midpoints `1, 3, 5, 7` and the centre `4`.

use crate::scalar::Real;

pub const REFERENCE_COORDS: [f64; 3] = [-1.0, 0.0, 1.0];

/// Values and derivatives of the three quadratic Lagrange polynomials.
#[inline]
pub fn line3<T: Real>(xi: T) -> ([T; 3], [T; 3]) {
    let half = T::half();
    let one = T::one();
    let two = T::two();
    ([half * xi * (xi - one), one - xi * xi, half * xi * (xi + one)], [xi - half, -two * xi, xi + half])
}

#[derive(Debug, Clone, Copy)]
pub struct Q2Eval<T> {
    pub values: [T; 9],
    /// Reference gradients `(dN/dxi, dN/deta)`.
    pub grads: [[T; 2]; 9],
}

/// Biquadratic shape functions at `(xi, eta)`.
pub fn q2_shape<T: Real>(xi: T, eta: T) -> Q2Eval<T> {
    let (lx, dlx) = line3(xi);
    let (ly, dly) = line3(eta);
    let mut values = [T::zero(); 9];
    let mut grads = [[T::zero(); 2]; 9];
    for j in 0..3 {
        for i in 0..3 {
            let k = 3 * j + i;
            values[k] = lx[i] * ly[j];
            grads[k] = [dlx[i] * ly[j], lx[i] * dly[j]];
        }
    }
    Q2Eval { values, grads }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lagrange_property() {
        for k in 0..9 {
            let xi = REFERENCE_COORDS[k % 3];
            let eta = REFERENCE_COORDS[k / 3];
            let s = q2_shape(xi, eta);
            for (i, v) in s.values.iter().enumerate() {
                let expected = if i == k { 1.0 } else { 0.0 };
                assert!((v - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let (xi, eta) = (0.3f64, -0.45);
        let h = 1e-6;
        let s = q2_shape(xi, eta);
        let px = q2_shape(xi + h, eta);
        let mx = q2_shape(xi - h, eta);
        let py = q2_shape(xi, eta + h);
        let my = q2_shape(xi, eta - h);
        for k in 0..9 {
            assert!((s.grads[k][0] - (px.values[k] - mx.values[k]) / (2.0 * h)).abs() < 1e-8);
            assert!((s.grads[k][1] - (py.values[k] - my.values[k]) / (2.0 * h)).abs() < 1e-8);
        }
    }

    proptest! {
        #[test]
        fn partition_of_unity(xi in -1.0f64..=1.0, eta in -1.0f64..=1.0) {
            let s = q2_shape(xi, eta);
            let sum: f64 = s.values.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-14);
            let gx: f64 = s.grads.iter().map(|g| g[0]).sum();
            let gy: f64 = s.grads.iter().map(|g| g[1]).sum();
            prop_assert!(gx.abs() < 1e-14 && gy.abs() < 1e-14);
        }

        #[test]
        fn line_partition_of_unity(xi in -1.0f64..=1.0) {
            let (v, d) = line3(xi);
            prop_assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            prop_assert!(d.iter().sum::<f64>().abs() < 1e-15);
        }
    }
}
