//! Discrete fields: a mesh with its dof map, interpolation of continuous
//! data and point evaluation of coefficient vectors.

use crate::error::{Error, Result};
use crate::fem::assembly::{ElementQuadrature, NORM_ORDER};
use crate::fem::shape::{line3, q2_shape};
use crate::geometry::{build_dof_map, build_mesh, DofMap, FaultGeometry, Side, StructuredMesh};
use crate::scalar::Real;

pub type Displacement<'a, T> = &'a dyn Fn(T, T, Side) -> [T; 2];

/// Displacement and gradient at a point; `grad[i][j] = d u_i / d x_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValue<T> {
    pub x: T,
    pub y: T,
    pub u: [T; 2],
    pub grad: [[T; 2]; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discretization<T> {
    mesh: StructuredMesh<T>,
    dofs: DofMap<T>,
}

impl<T: Real> Discretization<T> {
    pub fn new(n: usize, geom: FaultGeometry<T>, with_gamma: bool) -> Result<Self> {
        let mesh = build_mesh(n, geom)?;
        let dofs = build_dof_map(&mesh, with_gamma);
        Ok(Self { mesh, dofs })
    }

    pub fn from_parts(mesh: StructuredMesh<T>, dofs: DofMap<T>) -> Self {
        Self { mesh, dofs }
    }

    pub fn mesh(&self) -> &StructuredMesh<T> {
        &self.mesh
    }

    pub fn dofs(&self) -> &DofMap<T> {
        &self.dofs
    }

    pub fn dofs_mut(&mut self) -> &mut DofMap<T> {
        &mut self.dofs
    }

    /// Side of the fault a node belongs to; duplicated interface nodes take
    /// the side of their slot.
    pub fn node_side(&self, node: usize) -> Side {
        let nx = self.mesh.node_columns().len();
        match self.mesh.interface_slots() {
            Some(s) if node / nx == s.minus => Side::Minus,
            Some(s) if node / nx == s.plus => Side::Plus,
            _ => Side::of(self.mesh.nodes()[node][1]),
        }
    }

    /// Nodal interpolant. Slip dofs get `gamma` (zero if absent).
    pub fn interpolate(&self, u: Displacement<'_, T>, gamma: Option<&dyn Fn(T) -> T>) -> Vec<T> {
        let mut v = vec![T::zero(); self.dofs.n_dofs()];
        for (k, p) in self.mesh.nodes().iter().enumerate() {
            let val = u(p[0], p[1], self.node_side(k));
            v[self.dofs.u1(k)] = val[0];
            v[self.dofs.u2(k)] = val[1];
        }
        if let Some(g) = gamma {
            for (i, &x) in self.dofs.gamma_nodes_x().iter().enumerate() {
                v[self.dofs.gamma(i)] = g(x);
            }
        }
        v
    }

    /// Value and gradient in element `e` at reference coordinates.
    pub fn eval(&self, coeffs: &[T], e: usize, xi: T, eta: T) -> PointValue<T> {
        let el = &self.mesh.elements()[e];
        let s = q2_shape(xi, eta);
        let d = self.dofs.element_dofs(el);
        let sx = T::two() / el.width();
        let sy = T::two() / el.height();
        let mut u = [T::zero(); 2];
        let mut grad = [[T::zero(); 2]; 2];
        for k in 0..9 {
            let c = [coeffs[d[k]], coeffs[d[9 + k]]];
            for i in 0..2 {
                u[i] += c[i] * s.values[k];
                grad[i][0] += c[i] * s.grads[k][0] * sx;
                grad[i][1] += c[i] * s.grads[k][1] * sy;
            }
        }
        let [x, y] = el.map(xi, eta);
        PointValue { x, y, u, grad }
    }

    /// Value at a physical point; `side` selects the trace on `y = 0`.
    pub fn eval_at(&self, coeffs: &[T], x: T, y: T, side: Side) -> Result<PointValue<T>> {
        let (e, xi, eta) = self.mesh.locate(x, y, side)?;
        let mut p = self.eval(coeffs, e, xi, eta);
        p.x = x;
        p.y = y;
        Ok(p)
    }

    /// Slip and its derivative at `x`.
    pub fn gamma_at(&self, coeffs: &[T], x: T) -> Result<(T, T)> {
        if !self.dofs.has_gamma() {
            return Err(Error::InvalidConfig("field has no slip dofs".into()));
        }
        let (c, xi, w) = self.segment_of(x)?;
        let g = self.dofs.segment_gamma_dofs(c).expect("slip dofs checked");
        let (m, dm) = line3(xi);
        let mut v = (T::zero(), T::zero());
        for a in 0..3 {
            v.0 += coeffs[g[a]] * m[a];
            v.1 += coeffs[g[a]] * dm[a] * T::two() / w;
        }
        Ok(v)
    }

    /// `u1(x, 0+) - u1(x, 0-)` on the sharp interface.
    pub fn jump_at(&self, coeffs: &[T], x: T) -> Result<T> {
        let pairs = self.dofs.interface_trace_dofs()?;
        let (c, xi, _) = self.segment_of(x)?;
        let (m, _) = line3(xi);
        let mut j = T::zero();
        for a in 0..3 {
            let p = pairs[2 * c + a];
            j += (coeffs[p.plus] - coeffs[p.minus]) * m[a];
        }
        Ok(j)
    }

    /// `|u_h - w_h|` in `L2(Omega)` where `w_h` lives on `other`; quadrature
    /// runs on this mesh and `w_h` is evaluated on the side of each point.
    pub fn l2_distance(&self, coeffs: &[T], other: &Discretization<T>, other_coeffs: &[T]) -> Result<T> {
        for (d, c) in [(self, coeffs), (other, other_coeffs)] {
            if c.len() != d.dofs.n_dofs() {
                return Err(Error::DimensionMismatch { expected: d.dofs.n_dofs(), found: c.len() });
            }
        }
        let quad = ElementQuadrature::new(NORM_ORDER)?;
        let mut sum = T::zero();
        for (e, el) in self.mesh.elements().iter().enumerate() {
            for q in 0..quad.len() {
                let [xi, eta] = quad.reference_point(q);
                let p = self.eval(coeffs, e, xi, eta);
                let w = other.eval_at(other_coeffs, p.x, p.y, el.side_at(p.y))?;
                sum += quad.eval(el, q).jxw * ((p.u[0] - w.u[0]).powi(2) + (p.u[1] - w.u[1]).powi(2));
            }
        }
        Ok(sum.sqrt())
    }

    /// Element column containing `x`, reference coordinate and column width.
    fn segment_of(&self, x: T) -> Result<(usize, T, T)> {
        let (e, xi, _) = self.mesh.locate(x, T::zero(), Side::Plus)?;
        let el = &self.mesh.elements()[e];
        Ok((el.col, xi, el.width()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn quad(x: f64, y: f64, side: Side) -> [f64; 2] {
        let s = if side == Side::Plus { 1.0 } else { -1.0 };
        [x * x - 2.0 * x * y + s * (1.0 + x), y * y + 3.0 * x * y]
    }

    #[test]
    fn quadratics_are_reproduced_on_each_side() {
        let d = Discretization::new(4, FaultGeometry::sharp(), true).unwrap();
        let v = d.interpolate(&quad, Some(&|x: f64| x * x));
        for &(x, y, side) in &[(0.3, 0.7, Side::Plus), (-0.61, -0.2, Side::Minus), (0.1, 0.0, Side::Minus), (0.1, 0.0, Side::Plus)] {
            let p = d.eval_at(&v, x, y, side).unwrap();
            let e = quad(x, y, side);
            assert_relative_eq!(p.u[0], e[0], epsilon = 1e-13);
            assert_relative_eq!(p.u[1], e[1], epsilon = 1e-13);
            assert_relative_eq!(p.grad[0][0], 2.0 * x - 2.0 * y + if side == Side::Plus { 1.0 } else { -1.0 }, epsilon = 1e-12);
            assert_relative_eq!(p.grad[0][1], -2.0 * x, epsilon = 1e-12);
            assert_relative_eq!(p.grad[1][0], 3.0 * y, epsilon = 1e-12);
            assert_relative_eq!(p.grad[1][1], 2.0 * y + 3.0 * x, epsilon = 1e-12);
        }
        assert_relative_eq!(d.jump_at(&v, 0.37).unwrap(), 2.0 * 1.37, epsilon = 1e-13);
        let (g, gx) = d.gamma_at(&v, -0.44).unwrap();
        assert_relative_eq!(g, 0.44 * 0.44, epsilon = 1e-14);
        assert_relative_eq!(gx, -0.88, epsilon = 1e-13);
    }

    #[test]
    fn distance_between_meshes() {
        let a = Discretization::new(4, FaultGeometry::sharp(), false).unwrap();
        let b = Discretization::new(8, FaultGeometry::sharp(), false).unwrap();
        let va = a.interpolate(&quad, None);
        let vb = b.interpolate(&quad, None);
        assert!(a.l2_distance(&va, &b, &vb).unwrap() < 1e-13);
        let shifted: Vec<f64> = vb.iter().map(|v| v + 1.0).collect();
        // a unit shift of both components over an area of 4
        assert_relative_eq!(a.l2_distance(&va, &b, &shifted).unwrap(), 8f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn node_sides() {
        let d = Discretization::new(4, FaultGeometry::sharp(), false).unwrap();
        let s = d.mesh().interface_slots().unwrap();
        assert_eq!(d.node_side(d.mesh().node_id(s.minus, 3)), Side::Minus);
        assert_eq!(d.node_side(d.mesh().node_id(s.plus, 3)), Side::Plus);
        assert_eq!(d.node_side(0), Side::Minus);
        assert!(d.gamma_at(&vec![0.0; d.dofs().n_dofs()], 0.0).is_err());
        let e = Discretization::new(4, FaultGeometry::new(0.1).unwrap(), false).unwrap();
        assert!(e.jump_at(&vec![0.0; e.dofs().n_dofs()], 0.0).is_err());
    }
}
