//! Finite-difference check of the plasticity identity
//! `U_t - grad u_t + Curl(U) x v_d = 0` for `U = grad u - gamma e1 (x) e2`
//! under the slip law `gamma_t + beta gamma_x^2 (eta'(gamma) - nu gamma_xx - T12) = 0`.
//!
//! Fields are planar and embedded in three dimensions; `z` derivatives
//! vanish. `Curl` and the cross product act row-wise:
//! `Curl(U)_mn = e_ijn U_mj,i`, `(A x v)_mn = e_ijn A_mi v_j`, and the axial
//! vector is `X(A)_i = e_ijk A_jk`.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type Mat3<T> = [[T; 3]; 3];

fn levi(i: usize, j: usize, k: usize) -> i8 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
        _ => 0,
    }
}

fn signed<T: Real>(s: i8, v: T) -> T {
    match s {
        1 => v,
        -1 => -v,
        _ => T::zero(),
    }
}

/// Uniform samples `start + i step`, `i < len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis<T> {
    pub start: T,
    pub step: T,
    pub len: usize,
}

impl<T: Real> GridAxis<T> {
    /// `len` points spanning `[a, b]`.
    pub fn span(a: T, b: T, len: usize) -> Result<Self> {
        if len < 3 {
            return Err(Error::GridTooCoarse { points: len, required: 3 });
        }
        Ok(Self { start: a, step: (b - a) / T::from_usize_lossy(len - 1), len })
    }

    pub fn at(&self, i: usize) -> T {
        self.start + self.step * T::from_usize_lossy(i)
    }

    /// Same interval with the spacing halved.
    pub fn refined(&self) -> Self {
        Self { start: self.start, step: self.step * T::half(), len: 2 * self.len - 1 }
    }
}

/// Slip, displacement and stress sampled on `t x x x y`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction3<T> {
    pub t: GridAxis<T>,
    pub x: GridAxis<T>,
    pub y: GridAxis<T>,
    pub gamma: Vec<T>,
    pub u: Vec<[T; 3]>,
    pub stress: Vec<Mat3<T>>,
}

impl<T: Real> GridFunction3<T> {
    pub fn sample(
        t: GridAxis<T>,
        x: GridAxis<T>,
        y: GridAxis<T>,
        gamma: &dyn Fn(T, T, T) -> T,
        u: &dyn Fn(T, T, T) -> [T; 2],
        stress: &dyn Fn(T, T, T) -> [[T; 2]; 2],
    ) -> Result<Self> {
        for a in [&t, &x, &y] {
            if a.len < 3 {
                return Err(Error::GridTooCoarse { points: a.len, required: 3 });
            }
        }
        let n = t.len * x.len * y.len;
        let (mut g, mut uu, mut s) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for it in 0..t.len {
            for ix in 0..x.len {
                for iy in 0..y.len {
                    let (tt, xx, yy) = (t.at(it), x.at(ix), y.at(iy));
                    g.push(gamma(tt, xx, yy));
                    let v = u(tt, xx, yy);
                    uu.push([v[0], v[1], T::zero()]);
                    let m = stress(tt, xx, yy);
                    if m[0][1] != m[1][0] {
                        return Err(Error::InvalidConfig("stress samples must be symmetric".into()));
                    }
                    let z = T::zero();
                    s.push([[m[0][0], m[0][1], z], [m[1][0], m[1][1], z], [z, z, z]]);
                }
            }
        }
        Ok(Self { t, x, y, gamma: g, u: uu, stress: s })
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn index(&self, it: usize, ix: usize, iy: usize) -> usize {
        (it * self.x.len + ix) * self.y.len + iy
    }

    fn dims(&self) -> [usize; 3] {
        [self.t.len, self.x.len, self.y.len]
    }

    fn step(&self, axis: usize) -> T {
        [self.t.step, self.x.step, self.y.step][axis]
    }

    /// Second-order differences along `axis` (0 = t, 1 = x, 2 = y):
    /// centred inside, one-sided three-point at the ends.
    fn diff(&self, values: &[T], axis: usize) -> Vec<T> {
        let d = self.dims();
        let stride = match axis {
            0 => d[1] * d[2],
            1 => d[2],
            _ => 1,
        };
        let h2 = T::two() * self.step(axis);
        let (three, four) = (T::lit(3.0), T::lit(4.0));
        let mut out = vec![T::zero(); values.len()];
        for (k, o) in out.iter_mut().enumerate() {
            let i = (k / stride) % d[axis];
            *o = if i == 0 {
                (-three * values[k] + four * values[k + stride] - values[k + 2 * stride]) / h2
            } else if i == d[axis] - 1 {
                (three * values[k] - four * values[k - stride] + values[k - 2 * stride]) / h2
            } else {
                (values[k + stride] - values[k - stride]) / h2
            };
        }
        out
    }

    fn diff_mat(&self, field: &[Mat3<T>], axis: usize) -> Vec<Mat3<T>> {
        let mut out = vec![[[T::zero(); 3]; 3]; field.len()];
        for m in 0..3 {
            for n in 0..3 {
                let comp: Vec<T> = field.iter().map(|a| a[m][n]).collect();
                for (o, v) in out.iter_mut().zip(self.diff(&comp, axis)) {
                    o[m][n] = v;
                }
            }
        }
        out
    }

    /// `(grad u)_mj = d u_m / d x_j`.
    pub fn grad_u(&self) -> Vec<Mat3<T>> {
        let mut g = vec![[[T::zero(); 3]; 3]; self.len()];
        for m in 0..2 {
            let comp: Vec<T> = self.u.iter().map(|v| v[m]).collect();
            for (axis, j) in [(1, 0), (2, 1)] {
                for (o, v) in g.iter_mut().zip(self.diff(&comp, axis)) {
                    o[m][j] = v;
                }
            }
        }
        g
    }
}

/// Row-wise curl of a sampled matrix field.
pub fn curl_rowwise<T: Real>(grid: &GridFunction3<T>, field: &[Mat3<T>]) -> Result<Vec<Mat3<T>>> {
    if field.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), found: field.len() });
    }
    // derivatives along x (i = 0) and y (i = 1); z derivatives vanish
    let d = [grid.diff_mat(field, 1), grid.diff_mat(field, 2)];
    let mut out = vec![[[T::zero(); 3]; 3]; field.len()];
    for (k, o) in out.iter_mut().enumerate() {
        for m in 0..3 {
            for n in 0..3 {
                let mut s = T::zero();
                for (i, di) in d.iter().enumerate() {
                    for j in 0..3 {
                        s += signed(levi(i, j, n), di[k][m][j]);
                    }
                }
                o[m][n] = s;
            }
        }
    }
    Ok(out)
}

pub fn cross_rowwise<T: Real>(a: &Mat3<T>, v: &[T; 3]) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for m in 0..3 {
        for n in 0..3 {
            let mut s = T::zero();
            for i in 0..3 {
                for j in 0..3 {
                    s += signed(levi(i, j, n), a[m][i] * v[j]);
                }
            }
            out[m][n] = s;
        }
    }
    out
}

pub fn axial<T: Real>(a: &Mat3<T>) -> [T; 3] {
    let mut x = [T::zero(); 3];
    for (i, xi) in x.iter_mut().enumerate() {
        for j in 0..3 {
            for k in 0..3 {
                *xi += signed(levi(i, j, k), a[j][k]);
            }
        }
    }
    x
}

fn mat_mul<T: Real>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut c = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

/// `beta (I - w w / |w|^2) X(S Curl(U))` with `w = X(Curl(U))`; `None` when
/// `w = 0`.
pub fn defect_velocity<T: Real>(s: &Mat3<T>, curl: &Mat3<T>, beta: T) -> Option<[T; 3]> {
    let w = axial(curl);
    let ww = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
    if ww == T::zero() {
        return None;
    }
    let x = axial(&mat_mul(s, curl));
    let xw = (x[0] * w[0] + x[1] * w[1] + x[2] * w[2]) / ww;
    Some([beta * (x[0] - xw * w[0]), beta * (x[1] - xw * w[1]), beta * (x[2] - xw * w[2])])
}

/// `S = (T - 2 eta' e1 (x) e2 + 2 nu Curl Curl U)_sym`.
fn driving_stress<T: Real>(stress: &Mat3<T>, eta_prime: T, nu: T, curl_curl: &Mat3<T>) -> Mat3<T> {
    let mut a = *stress;
    a[0][1] -= T::two() * eta_prime;
    for i in 0..3 {
        for j in 0..3 {
            a[i][j] += T::two() * nu * curl_curl[i][j];
        }
    }
    let mut s = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            s[i][j] = T::half() * (a[i][j] + a[j][i]);
        }
    }
    s
}

/// `Curl Curl U` for `U = grad u - gamma e1 (x) e2`: first row
/// `(-gamma_xy, gamma_xx, 0)`.
pub fn curl_curl_ansatz<T: Real>(gamma_xx: T, gamma_xy: T) -> Mat3<T> {
    let z = T::zero();
    [[-gamma_xy, gamma_xx, z], [z; 3], [z; 3]]
}

/// Defect velocity of the ansatz from exact derivatives of `gamma`; the
/// curl is `-gamma_x` in entry (1, 3).
pub fn defect_velocity_ansatz<T: Real>(gamma_x: T, gamma_xx: T, gamma_xy: T, eta_prime: T, stress: &Mat3<T>, nu: T, beta: T) -> Option<[T; 3]> {
    let z = T::zero();
    let curl = [[z, z, -gamma_x], [z; 3], [z; 3]];
    let s = driving_stress(stress, eta_prime, nu, &curl_curl_ansatz(gamma_xx, gamma_xy));
    defect_velocity(&s, &curl, beta)
}

/// Indices in the middle half of `a`, at least two steps from either end.
fn inner<T: Real>(a: &GridAxis<T>) -> std::ops::Range<usize> {
    let q = T::lit(0.25) * T::from_usize_lossy(a.len - 1);
    let lo = q.ceil().to_usize().unwrap_or(0).max(2);
    let hi = (T::from_usize_lossy(a.len - 1) - q).floor().to_usize().unwrap_or(0).min(a.len - 3);
    lo..hi + 1
}

/// Smooth data of the identity; `stress` must satisfy the slip law.
#[derive(Clone, Copy)]
pub struct PlasticityData<'a, T> {
    pub gamma: &'a dyn Fn(T, T, T) -> T,
    pub eta_prime: &'a dyn Fn(T) -> T,
    pub beta: &'a dyn Fn(T, T, T) -> T,
    pub nu: T,
    pub u: &'a dyn Fn(T, T, T) -> [T; 2],
    pub stress: &'a dyn Fn(T, T, T) -> [[T; 2]; 2],
}

/// Max-norm of the identity's residual over grid points in the middle half
/// of every axis, all derivatives by second-order differences. Points also
/// stay two steps from the boundary so that `Curl Curl` never differences
/// the one-sided boundary values of `Curl`, which would be first order; the
/// fixed region keeps the maximiser from drifting with the grid.
pub fn plasticity_lemma_residual<T: Real>(data: &PlasticityData<'_, T>, t: GridAxis<T>, x: GridAxis<T>, y: GridAxis<T>) -> Result<T> {
    for a in [&t, &x, &y] {
        if a.len < 5 {
            return Err(Error::GridTooCoarse { points: a.len, required: 5 });
        }
    }
    let grid = GridFunction3::sample(t, x, y, data.gamma, data.u, data.stress)?;
    let gu = grid.grad_u();
    let mut big_u = gu.clone();
    for (m, &g) in big_u.iter_mut().zip(&grid.gamma) {
        m[0][1] -= g;
    }
    let curl = curl_rowwise(&grid, &big_u)?;
    let curl_curl = curl_rowwise(&grid, &curl)?;
    let ut = grid.diff_mat(&big_u, 0);
    let gut = grid.diff_mat(&gu, 0);
    let (ts, xs, ys) = (inner(&t), inner(&x), inner(&y));
    let mut worst = T::zero();
    for it in ts.clone() {
        for ix in xs.clone() {
            for iy in ys.clone() {
                let k = grid.index(it, ix, iy);
                let (tt, xx, yy) = (t.at(it), x.at(ix), y.at(iy));
                let s = driving_stress(&grid.stress[k], (data.eta_prime)(grid.gamma[k]), data.nu, &curl_curl[k]);
                let v = defect_velocity(&s, &curl[k], (data.beta)(tt, xx, yy)).ok_or(Error::DegenerateDirection {
                    t: tt.to_f64_lossy(),
                    x: xx.to_f64_lossy(),
                    y: yy.to_f64_lossy(),
                })?;
                let cv = cross_rowwise(&curl[k], &v);
                for m in 0..3 {
                    for n in 0..3 {
                        worst = worst.max((ut[k][m][n] - gut[k][m][n] + cv[m][n]).abs());
                    }
                }
            }
        }
    }
    Ok(worst)
}
