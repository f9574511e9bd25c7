//! Global assembly of the bilinear and linear forms of the bulk, the fault
//! strip and the sharp interface.
//!
//! Element dofs are ordered `[u1 of local nodes 0..9, u2 of local nodes 0..9]`
//! and interface segment `c` carries the three slip nodes `2c, 2c+1, 2c+2`.
//! Element loops run in mesh order, so assembled matrices are reproducible
//! bit for bit.

use crate::error::{Error, Result};
use crate::fem::quadrature::{gauss_rule, GaussRule1d, GaussRule2d};
use crate::fem::shape::{line3, q2_shape, Q2Eval};
use crate::fem::sparse::Triplets;
use crate::geometry::{DofMap, Element, Region, Side, StructuredMesh};
use crate::material::{Coefficients, MaterialField};
use crate::scalar::Real;

/// Points per direction for stiffness, mass and loads.
pub const STIFFNESS_ORDER: usize = 3;
/// Points per direction for error norms.
pub const NORM_ORDER: usize = 5;
/// Points per interface segment.
pub const INTERFACE_ORDER: usize = 3;

pub type BodyForce<'a, T> = &'a dyn Fn(T, T, Side) -> [T; 2];
pub type LineFunction<'a, T> = &'a dyn Fn(T) -> T;
pub type StressField<'a, T> = &'a dyn Fn(T, T, Side) -> [[T; 2]; 2];

/// Shape data mapped to one physical quadrature point.
#[derive(Debug, Clone, Copy)]
pub struct PointEval<T> {
    pub x: T,
    pub y: T,
    /// Quadrature weight times Jacobian.
    pub jxw: T,
    pub n: [T; 9],
    /// Physical gradients `(dN/dx, dN/dy)`.
    pub dn: [[T; 2]; 9],
}

/// Reference shape values cached for a tensor Gauss rule.
#[derive(Debug, Clone)]
pub struct ElementQuadrature<T> {
    rule: GaussRule2d<T>,
    shapes: Vec<Q2Eval<T>>,
}

impl<T: Real> ElementQuadrature<T> {
    pub fn new(order: usize) -> Result<Self> {
        let rule = gauss_rule(order)?;
        let shapes = rule.points.iter().map(|p| q2_shape(p[0], p[1])).collect();
        Ok(Self { rule, shapes })
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    /// Reference coordinates of point `q`.
    pub fn reference_point(&self, q: usize) -> [T; 2] {
        self.rule.points[q]
    }

    pub fn eval(&self, el: &Element<T>, q: usize) -> PointEval<T> {
        let p = self.rule.points[q];
        let [x, y] = el.map(p[0], p[1]);
        let sx = T::two() / el.width();
        let sy = T::two() / el.height();
        let s = &self.shapes[q];
        let mut dn = [[T::zero(); 2]; 9];
        for k in 0..9 {
            dn[k] = [s.grads[k][0] * sx, s.grads[k][1] * sy];
        }
        PointEval { x, y, jxw: self.rule.weights[q] * el.area() / T::lit(4.0), n: s.values, dn }
    }

    pub fn points<'a>(&'a self, el: &'a Element<T>) -> impl Iterator<Item = PointEval<T>> + 'a {
        (0..self.len()).map(move |q| self.eval(el, q))
    }
}

/// One point on an interface segment with the three line shape functions.
#[derive(Debug, Clone, Copy)]
pub struct SegmentPoint<T> {
    pub x: T,
    pub w: T,
    pub m: [T; 3],
    pub dm: [T; 3],
}

pub fn segment_points<T: Real>(rule: &GaussRule1d<T>, x0: T, x1: T) -> Vec<SegmentPoint<T>> {
    let len = x1 - x0;
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(&xi, &w)| {
            let (m, d) = line3(xi);
            let s = T::two() / len;
            SegmentPoint { x: (x0 + x1) * T::half() + len * T::half() * xi, w: w * len * T::half(), m, dm: [d[0] * s, d[1] * s, d[2] * s] }
        })
        .collect()
}

/// Slip-node coordinates `(x0, x1)` of interface segment `c`.
fn segment_bounds<T: Real>(mesh: &StructuredMesh<T>, c: usize) -> (T, T) {
    let xs = mesh.node_columns();
    (xs[2 * c], xs[2 * c + 2])
}

/// Coefficients governing interface segment `c`: those of the element just
/// above `y = 0` in that column.
fn segment_coefficients<'a, T: Real>(mesh: &StructuredMesh<T>, mat: &'a MaterialField<T>, c: usize) -> &'a Coefficients<T> {
    let ncols = mesh.columns();
    let row = mesh.elements().iter().step_by(ncols).position(|el| el.side == Side::Plus).unwrap_or(0);
    mat.cell(row * ncols + c)
}

fn check_layout<T: Real>(mesh: &StructuredMesh<T>, dofs: &DofMap<T>, mat: &MaterialField<T>) -> Result<()> {
    if mat.len() != mesh.elements().len() {
        return Err(Error::DimensionMismatch { expected: mesh.elements().len(), found: mat.len() });
    }
    let nodes = mesh.nodes().len();
    let last = mesh.elements().last().map(|e| e.nodes[8]).unwrap_or(0);
    if last >= nodes || dofs.u1(nodes - 1) >= dofs.n_dofs() {
        return Err(Error::DimensionMismatch { expected: nodes, found: last + 1 });
    }
    if dofs.has_gamma() && dofs.n_gamma() != mesh.node_columns().len() {
        return Err(Error::DimensionMismatch { expected: mesh.node_columns().len(), found: dofs.n_gamma() });
    }
    Ok(())
}

/// Local stiffness of `a(u, v) = 2mu(u1x v1x + u2y v2y) + lambda div u div v
/// + shear mu (u1y + u2x)(v1y + v2x)`.
fn elasticity_block<T: Real>(quad: &ElementQuadrature<T>, el: &Element<T>, c: &Coefficients<T>, shear: T) -> [[T; 18]; 18] {
    let mut k = [[T::zero(); 18]; 18];
    let p_mod = T::two() * c.mu + c.lambda;
    let g = c.mu * shear;
    for p in quad.points(el) {
        for a in 0..9 {
            let [ax, ay] = p.dn[a];
            for b in 0..9 {
                let [bx, by] = p.dn[b];
                k[a][b] += p.jxw * (p_mod * ax * bx + g * ay * by);
                k[a][9 + b] += p.jxw * (c.lambda * ax * by + g * ay * bx);
                k[9 + a][b] += p.jxw * (c.lambda * ay * bx + g * ax * by);
                k[9 + a][9 + b] += p.jxw * (p_mod * ay * by + g * ax * bx);
            }
        }
    }
    k
}

/// Stiffness of the stored energy over all elements. With `masked`, fault
/// elements use the energy of `(u1x, sqrt(eps) u1y; sqrt(eps) u2x, u2y)`.
pub fn assemble_bulk_elasticity<T: Real>(mesh: &StructuredMesh<T>, dofs: &DofMap<T>, mat: &MaterialField<T>, masked: bool) -> Result<Triplets<T>> {
    let scale = if masked { mesh.eps() } else { T::one() };
    assemble_elasticity_with_fault_shear(mesh, dofs, mat, scale)
}

/// As [`assemble_bulk_elasticity`] with an explicit factor on the fault
/// shear term (`1` reproduces the unmasked operator).
pub fn assemble_elasticity_with_fault_shear<T: Real>(
    mesh: &StructuredMesh<T>,
    dofs: &DofMap<T>,
    mat: &MaterialField<T>,
    fault_shear: T,
) -> Result<Triplets<T>> {
    check_layout(mesh, dofs, mat)?;
    let quad = ElementQuadrature::new(STIFFNESS_ORDER)?;
    let mut t = Triplets::with_capacity(dofs.n_dofs(), mesh.elements().len() * 324);
    for (e, el) in mesh.elements().iter().enumerate() {
        let shear = match el.region {
            Region::Bulk => T::one(),
            Region::Fault => fault_shear,
        };
        let k = elasticity_block(&quad, el, mat.cell(e), shear);
        t.push_block(&dofs.element_dofs(el), &k);
    }
    Ok(t)
}

/// Sharp-interface terms: `int mu [u1][v1]`, the cross terms `-int mu gamma [v1]`
/// and `-int mu [u1] gamma_hat`, `int mu gamma gamma_hat`, and
/// `int (nu gamma_x gamma_hat_x + eta_hat gamma gamma_hat)`. The slip blocks are
/// present only when the dof map carries slip dofs.
pub fn assemble_interface_coupling<T: Real>(mesh: &StructuredMesh<T>, dofs: &DofMap<T>, mat: &MaterialField<T>) -> Result<Triplets<T>> {
    check_layout(mesh, dofs, mat)?;
    let pairs = dofs.interface_trace_dofs()?;
    let rule = GaussRule1d::new(INTERFACE_ORDER)?;
    let mut t = Triplets::new(dofs.n_dofs());
    for c in 0..mesh.columns() {
        let (x0, x1) = segment_bounds(mesh, c);
        let coeffs = segment_coefficients(mesh, mat, c);
        let mu = coeffs.mu;
        let plus = [pairs[2 * c].plus, pairs[2 * c + 1].plus, pairs[2 * c + 2].plus];
        let minus = [pairs[2 * c].minus, pairs[2 * c + 1].minus, pairs[2 * c + 2].minus];
        match dofs.segment_gamma_dofs(c) {
            Some(g) => {
                let ids = [plus[0], plus[1], plus[2], minus[0], minus[1], minus[2], g[0], g[1], g[2]];
                let mut k = [[T::zero(); 9]; 9];
                for p in segment_points(&rule, x0, x1) {
                    // coefficient vector of [u1] - gamma
                    let mut d = [T::zero(); 9];
                    for a in 0..3 {
                        d[a] = p.m[a];
                        d[3 + a] = -p.m[a];
                        d[6 + a] = -p.m[a];
                    }
                    for a in 0..9 {
                        for b in 0..9 {
                            k[a][b] += p.w * mu * d[a] * d[b];
                        }
                    }
                    for a in 0..3 {
                        for b in 0..3 {
                            k[6 + a][6 + b] += p.w * (coeffs.nu * p.dm[a] * p.dm[b] + coeffs.eta_hat * p.m[a] * p.m[b]);
                        }
                    }
                }
                t.push_block(&ids, &k);
            }
            None => {
                let ids = [plus[0], plus[1], plus[2], minus[0], minus[1], minus[2]];
                let mut k = [[T::zero(); 6]; 6];
                for p in segment_points(&rule, x0, x1) {
                    let mut d = [T::zero(); 6];
                    for a in 0..3 {
                        d[a] = p.m[a];
                        d[3 + a] = -p.m[a];
                    }
                    for a in 0..6 {
                        for b in 0..6 {
                            k[a][b] += p.w * mu * d[a] * d[b];
                        }
                    }
                }
                t.push_block(&ids, &k);
            }
        }
    }
    Ok(t)
}

/// Shape values of the three slip nodes of element `el` at reference `xi`.
fn slip_shape<T: Real>(el: &Element<T>, xi: T) -> ([T; 3], [T; 3]) {
    let (m, d) = line3(xi);
    let s = T::two() / el.width();
    (m, [d[0] * s, d[1] * s, d[2] * s])
}

/// Fault-strip coupling of the thin-fault problem: with `s = u2x + u1y`,
/// the terms `-int_S mu s gamma_hat`, `-int_S mu gamma (v2x + v1y)` and
/// `(1/eps) int_S mu gamma gamma_hat`, plus the slip regularisation
/// `(1/eps) int_S (nu gamma_x gamma_hat_x + eta_hat gamma gamma_hat)`.
/// Slip depends on x only.
pub fn assemble_eps_fault_coupling<T: Real>(mesh: &StructuredMesh<T>, dofs: &DofMap<T>, mat: &MaterialField<T>) -> Result<Triplets<T>> {
    let mut t = fault_shear_coupling(mesh, dofs, mat)?;
    t.extend(slip_regularization(mesh, dofs, mat)?);
    Ok(t)
}

fn require_fault_slip<T: Real>(mesh: &StructuredMesh<T>, dofs: &DofMap<T>) -> Result<()> {
    if mesh.is_sharp() {
        return Err(Error::WrongMeshKind { expected: "thin-fault (eps > 0)" });
    }
    if !dofs.has_gamma() {
        return Err(Error::InvalidConfig("fault coupling needs slip dofs".into()));
    }
    Ok(())
}

/// The `mu`-weighted cross and slip-slip blocks of [`assemble_eps_fault_coupling`].
pub fn fault_shear_coupling<T: Real>(mesh: &StructuredMesh<T>, dofs: &DofMap<T>, mat: &MaterialField<T>) -> Result<Triplets<T>> {
    check_layout(mesh, dofs, mat)?;
    require_fault_slip(mesh, dofs)?;
    let quad = ElementQuadrature::new(STIFFNESS_ORDER)?;
    let inv_eps = T::one() / mesh.eps();
    let mut t = Triplets::new(dofs.n_dofs());
    for (e, el) in mesh.elements().iter().enumerate() {
        if el.region != Region::Fault {
            continue;
        }
        let mu = mat.cell(e).mu;
        let g = dofs.segment_gamma_dofs(el.col).expect("slip dofs checked");
        let ed = dofs.element_dofs(el);
        let mut ids = [0usize; 21];
        ids[..18].copy_from_slice(&ed);
        ids[18..].copy_from_slice(&g);
        let mut k = [[T::zero(); 21]; 21];
        for (q, p) in quad.points(el).enumerate() {
            let xi = quad.rule.points[q][0];
            let (m, _) = slip_shape(el, xi);
            // s(N) for each u dof
            let mut s = [T::zero(); 18];
            for a in 0..9 {
                s[a] = p.dn[a][1];
                s[9 + a] = p.dn[a][0];
            }
            for a in 0..18 {
                for b in 0..3 {
                    let v = -p.jxw * mu * s[a] * m[b];
                    k[a][18 + b] += v;
                    k[18 + b][a] += v;
                }
            }
            for a in 0..3 {
                for b in 0..3 {
                    k[18 + a][18 + b] += p.jxw * mu * inv_eps * m[a] * m[b];
                }
            }
        }
        t.push_block(&ids, &k);
    }
    Ok(t)
}

/// `int ell(gamma, gamma_hat)` along the interface, averaged across the strip
/// for thin faults.
pub fn slip_regularization<T: Real>(mesh: &StructuredMesh<T>, dofs: &DofMap<T>, mat: &MaterialField<T>) -> Result<Triplets<T>> {
    slip_bilinear(mesh, dofs, mat, |c| (c.nu, c.eta_hat))
}

/// Slip mass `int (1/beta) gamma gamma_hat`, averaged across the strip for
/// thin faults.
pub fn assemble_slip_mass<T: Real>(mesh: &StructuredMesh<T>, dofs: &DofMap<T>, mat: &MaterialField<T>) -> Result<Triplets<T>> {
    slip_bilinear(mesh, dofs, mat, |c| (T::zero(), T::one() / c.beta))
}

/// `int (a gamma_x gamma_hat_x + b gamma gamma_hat)` with `(a, b)` from the
/// coefficients: per interface segment on sharp meshes, `(1/eps) int_S` on
/// fault elements otherwise.
fn slip_bilinear<T: Real>(
    mesh: &StructuredMesh<T>,
    dofs: &DofMap<T>,
    mat: &MaterialField<T>,
    coeffs: impl Fn(&Coefficients<T>) -> (T, T),
) -> Result<Triplets<T>> {
    check_layout(mesh, dofs, mat)?;
    if !dofs.has_gamma() {
        return Err(Error::InvalidConfig("slip forms need slip dofs".into()));
    }
    let mut t = Triplets::new(dofs.n_dofs());
    if mesh.is_sharp() {
        let rule = GaussRule1d::new(INTERFACE_ORDER)?;
        for c in 0..mesh.columns() {
            let (x0, x1) = segment_bounds(mesh, c);
            let (a_coef, b_coef) = coeffs(segment_coefficients(mesh, mat, c));
            let g = dofs.segment_gamma_dofs(c).expect("slip dofs checked");
            let mut k = [[T::zero(); 3]; 3];
            for p in segment_points(&rule, x0, x1) {
                for a in 0..3 {
                    for b in 0..3 {
                        k[a][b] += p.w * (a_coef * p.dm[a] * p.dm[b] + b_coef * p.m[a] * p.m[b]);
                    }
                }
            }
            t.push_block(&g, &k);
        }
    } else {
        let quad = ElementQuadrature::new(STIFFNESS_ORDER)?;
        let inv_eps = T::one() / mesh.eps();
        for (e, el) in mesh.elements().iter().enumerate() {
            if el.region != Region::Fault {
                continue;
            }
            let (a_coef, b_coef) = coeffs(mat.cell(e));
            let g = dofs.segment_gamma_dofs(el.col).expect("slip dofs checked");
            let mut k = [[T::zero(); 3]; 3];
            for (q, p) in quad.points(el).enumerate() {
                let (m, dm) = slip_shape(el, quad.rule.points[q][0]);
                for a in 0..3 {
                    for b in 0..3 {
                        k[a][b] += p.jxw * inv_eps * (a_coef * dm[a] * dm[b] + b_coef * m[a] * m[b]);
                    }
                }
            }
            t.push_block(&g, &k);
        }
    }
    Ok(t)
}

/// Consistent mass `int rho u . v`.
pub fn assemble_mass<T: Real>(mesh: &StructuredMesh<T>, dofs: &DofMap<T>, mat: &MaterialField<T>) -> Result<Triplets<T>> {
    check_layout(mesh, dofs, mat)?;
    let quad = ElementQuadrature::new(STIFFNESS_ORDER)?;
    let mut t = Triplets::with_capacity(dofs.n_dofs(), mesh.elements().len() * 162);
    for (e, el) in mesh.elements().iter().enumerate() {
        let rho = mat.cell(e).rho;
        let mut k = [[T::zero(); 9]; 9];
        for p in quad.points(el) {
            for a in 0..9 {
                for b in 0..9 {
                    k[a][b] += p.jxw * rho * p.n[a] * p.n[b];
                }
            }
        }
        let ed = dofs.element_dofs(el);
        let mut d1 = [0usize; 9];
        let mut d2 = [0usize; 9];
        d1.copy_from_slice(&ed[..9]);
        d2.copy_from_slice(&ed[9..]);
        t.push_block(&d1, &k);
        t.push_block(&d2, &k);
    }
    Ok(t)
}

fn finite<T: Real>(what: &'static str, x: T, y: T, vals: &[T]) -> Result<()> {
    if vals.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { what, x: x.to_f64_lossy(), y: y.to_f64_lossy() })
    }
}

/// Right-hand side `int rho f . v + int f0 gamma_hat`. Either source may be
/// absent; the slip source needs slip dofs.
pub fn assemble_load<T: Real>(
    mesh: &StructuredMesh<T>,
    dofs: &DofMap<T>,
    mat: &MaterialField<T>,
    f: Option<BodyForce<'_, T>>,
    f0: Option<LineFunction<'_, T>>,
) -> Result<Vec<T>> {
    check_layout(mesh, dofs, mat)?;
    let mut rhs = vec![T::zero(); dofs.n_dofs()];
    if let Some(f) = f {
        let quad = ElementQuadrature::new(STIFFNESS_ORDER)?;
        for (e, el) in mesh.elements().iter().enumerate() {
            let rho = mat.cell(e).rho;
            let ed = dofs.element_dofs(el);
            for p in quad.points(el) {
                let v = f(p.x, p.y, el.side_at(p.y));
                finite("body force", p.x, p.y, &v)?;
                for a in 0..9 {
                    rhs[ed[a]] += p.jxw * rho * v[0] * p.n[a];
                    rhs[ed[9 + a]] += p.jxw * rho * v[1] * p.n[a];
                }
            }
        }
    }
    if let Some(f0) = f0 {
        if !dofs.has_gamma() {
            return Err(Error::InvalidConfig("slip source given but no slip dofs".into()));
        }
        let rule = GaussRule1d::new(INTERFACE_ORDER)?;
        for c in 0..mesh.columns() {
            let (x0, x1) = segment_bounds(mesh, c);
            let g = dofs.segment_gamma_dofs(c).expect("slip dofs checked");
            for p in segment_points(&rule, x0, x1) {
                let v = f0(p.x);
                finite("slip source", p.x, T::zero(), &[v])?;
                for a in 0..3 {
                    rhs[g[a]] += p.w * v * p.m[a];
                }
            }
        }
    }
    Ok(rhs)
}

/// Load of a prescribed slip `gamma(x)`: `int mu gamma [v1]` on the sharp
/// interface, `int_S mu gamma (v2x + v1y)` on a fault strip.
pub fn assemble_slip_data_load<T: Real>(
    mesh: &StructuredMesh<T>,
    dofs: &DofMap<T>,
    mat: &MaterialField<T>,
    gamma: LineFunction<'_, T>,
) -> Result<Vec<T>> {
    check_layout(mesh, dofs, mat)?;
    let mut rhs = vec![T::zero(); dofs.n_dofs()];
    if mesh.is_sharp() {
        let pairs = dofs.interface_trace_dofs()?;
        let rule = GaussRule1d::new(INTERFACE_ORDER)?;
        for c in 0..mesh.columns() {
            let (x0, x1) = segment_bounds(mesh, c);
            let mu = segment_coefficients(mesh, mat, c).mu;
            for p in segment_points(&rule, x0, x1) {
                let g = gamma(p.x);
                finite("slip data", p.x, T::zero(), &[g])?;
                for a in 0..3 {
                    let pair = pairs[2 * c + a];
                    rhs[pair.plus] += p.w * mu * g * p.m[a];
                    rhs[pair.minus] -= p.w * mu * g * p.m[a];
                }
            }
        }
    } else {
        let quad = ElementQuadrature::new(STIFFNESS_ORDER)?;
        for (e, el) in mesh.elements().iter().enumerate() {
            if el.region != Region::Fault {
                continue;
            }
            let mu = mat.cell(e).mu;
            let ed = dofs.element_dofs(el);
            for p in quad.points(el) {
                let g = gamma(p.x);
                finite("slip data", p.x, p.y, &[g])?;
                for a in 0..9 {
                    rhs[ed[a]] += p.jxw * mu * g * p.dn[a][1];
                    rhs[ed[9 + a]] += p.jxw * mu * g * p.dn[a][0];
                }
            }
        }
    }
    Ok(rhs)
}

/// Neumann load `int_{x = +-1} (sigma n) . v` from a stress field.
pub fn assemble_side_traction<T: Real>(mesh: &StructuredMesh<T>, dofs: &DofMap<T>, stress: StressField<'_, T>) -> Result<Vec<T>> {
    let rule = GaussRule1d::<T>::new(STIFFNESS_ORDER)?;
    let mut rhs = vec![T::zero(); dofs.n_dofs()];
    let ncols = mesh.columns();
    for el in mesh.elements() {
        for (edge_col, i, normal) in [(0, 0usize, -T::one()), (ncols - 1, 2usize, T::one())] {
            if el.col != edge_col {
                continue;
            }
            let x = if i == 0 { el.bounds[0] } else { el.bounds[1] };
            let ed = dofs.element_dofs(el);
            for (&eta, &w) in rule.points.iter().zip(&rule.weights) {
                let y = el.map(T::zero(), eta)[1];
                let s = stress(x, y, el.side_at(y));
                let t = [s[0][0] * normal, s[1][0] * normal];
                finite("boundary stress", x, y, &t)?;
                let (l, _) = line3(eta);
                let jw = w * el.height() * T::half();
                for j in 0..3 {
                    let k = 3 * j + i;
                    rhs[ed[k]] += jw * t[0] * l[j];
                    rhs[ed[9 + k]] += jw * t[1] * l[j];
                }
            }
        }
    }
    Ok(rhs)
}
