//! Gauss–Legendre rules on `[-1, 1]` and their tensor products on the
//! reference square.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MAX_ORDER: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule1d<T> {
    pub points: Vec<T>,
    pub weights: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule2d<T> {
    pub points: Vec<[T; 2]>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussRule1d<T> {
    pub fn new(order: usize) -> Result<Self> {
        let (points, weights) = legendre_nodes(order)?;
        Ok(Self { points: points.into_iter().map(T::lit).collect(), weights: weights.into_iter().map(T::lit).collect() })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate(&self, a: T, b: T, mut f: impl FnMut(T) -> T) -> T {
        let half = (b - a) * T::half();
        let mid = (a + b) * T::half();
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(mid + half * p)).sum::<T>() * half
    }

    /// Maps the rule to `[a, b]`, returning physical points and scaled weights.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) * T::half();
        let mid = (a + b) * T::half();
        self.points.iter().zip(&self.weights).map(move |(&p, &w)| (mid + half * p, w * half))
    }
}

/// Tensor-product Gauss–Legendre rule with `order` points per direction.
pub fn gauss_rule<T: Real>(order: usize) -> Result<GaussRule2d<T>> {
    let line = GaussRule1d::<T>::new(order)?;
    let mut points = Vec::with_capacity(order * order);
    let mut weights = Vec::with_capacity(order * order);
    for (&eta, &we) in line.points.iter().zip(&line.weights) {
        for (&xi, &wx) in line.points.iter().zip(&line.weights) {
            points.push([xi, eta]);
            weights.push(wx * we);
        }
    }
    Ok(GaussRule2d { points, weights })
}

/// Nodes and weights by Newton iteration on the Legendre polynomial, always
/// in `f64`.
fn legendre_nodes(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::UnsupportedQuadrature(order));
    }
    let n = order;
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        points[i] = -x;
        points[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
    Ok((points, weights))
}

/// `(P_n(x), P_n'(x))` via the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_point_rule() {
        let r = gauss_rule::<f64>(1).unwrap();
        assert_eq!(r.points, vec![[0.0, 0.0]]);
        assert_relative_eq!(r.weights[0], 4.0);
    }

    #[test]
    fn three_point_rule_integrates_x4_y4() {
        let r = gauss_rule::<f64>(3).unwrap();
        let s: f64 = r.points.iter().zip(&r.weights).map(|(p, w)| w * p[0].powi(4) * p[1].powi(4)).sum();
        assert_relative_eq!(s, 4.0 / 25.0, epsilon = 1e-15);
    }

    #[test]
    fn two_point_rule_is_exact_for_cubics() {
        let r = gauss_rule::<f64>(2).unwrap();
        for i in 0..=3 {
            for j in 0..=3 {
                let s: f64 = r.points.iter().zip(&r.weights).map(|(p, w)| w * p[0].powi(i) * p[1].powi(j)).sum();
                let exact = |k: i32| if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert_relative_eq!(s, exact(i) * exact(j), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn every_order_is_exact_to_degree_2n_minus_1() {
        for n in 1..=MAX_ORDER {
            let r = GaussRule1d::<f64>::new(n).unwrap();
            assert_relative_eq!(r.weights.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
            for k in 0..2 * n {
                let s: f64 = r.points.iter().zip(&r.weights).map(|(x, w)| w * x.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((s - exact).abs() < 1e-13, "n={n} k={k}: {s} vs {exact}");
            }
        }
    }

    #[test]
    fn single_precision_rule() {
        let r = gauss_rule::<f32>(4).unwrap();
        let s: f32 = r.weights.iter().sum();
        assert!((s - 4.0).abs() < 1e-5);
    }

    #[test]
    fn unsupported_orders() {
        assert_eq!(gauss_rule::<f64>(0).unwrap_err(), Error::UnsupportedQuadrature(0));
        assert!(gauss_rule::<f64>(MAX_ORDER + 1).is_err());
    }
}
