//! Linear solver and the stationary limit and thin-fault problems.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::fem::assembly::{
    assemble_bulk_elasticity, assemble_eps_fault_coupling, assemble_interface_coupling, assemble_load, assemble_side_traction,
    assemble_slip_data_load, segment_points, BodyForce, ElementQuadrature, LineFunction, StressField, NORM_ORDER,
};
use crate::fem::elasticity::{fault_gradient, strain_energy_density};
use crate::fem::quadrature::GaussRule1d;
use crate::fem::shape::line3;
use crate::fem::sparse::{apply_dirichlet, CsrMatrix, SparseSystem};
use crate::field::{Discretization, Displacement};
use crate::geometry::{FaultGeometry, Region};
use crate::material::{Coefficients, MaterialField};
use crate::scalar::{dot, norm2, Real};

/// Free dof count below which [`solve_spd`] factors densely.
pub const DENSE_THRESHOLD: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    /// Relative residual `|Ku - F| / |F|` required on exit.
    pub tol: T,
    /// Defaults to the system size plus 1000.
    pub max_iterations: Option<usize>,
    pub dense_threshold: usize,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-12), max_iterations: None, dense_threshold: DENSE_THRESHOLD }
    }
}

impl<T: Real> SolverOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        Self { tol, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > T::zero() && self.tol <= T::lit(1e-6)) {
            return Err(Error::InvalidConfig(format!("solver tolerance {} outside (0, 1e-6]", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Cholesky,
    ConjugateGradient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub free_dofs: usize,
    /// CG iterations; 0 for the direct solver.
    pub iterations: usize,
    /// Final true relative residual.
    pub residual: f64,
    pub wall_time: Duration,
    pub method: SolveMethod,
}

/// Solves a symmetric positive definite system to relative residual `tol`.
pub fn solve_spd<T: Real>(system: &SparseSystem<T>, tol: T) -> Result<(Vec<T>, SolveReport)> {
    solve_spd_with(system, &SolverOptions::with_tol(tol))
}

pub fn solve_spd_with<T: Real>(system: &SparseSystem<T>, opts: &SolverOptions<T>) -> Result<(Vec<T>, SolveReport)> {
    opts.validate()?;
    let start = Instant::now();
    let n = system.dim();
    let (x, iterations, method) = if n < opts.dense_threshold {
        (dense_cholesky_solve(&system.matrix, &system.rhs)?, 0, SolveMethod::Cholesky)
    } else {
        let (x, it) = conjugate_gradient(&system.matrix, &system.rhs, opts)?;
        (x, it, SolveMethod::ConjugateGradient)
    };
    let residual = relative_residual(&system.matrix, &system.rhs, &x);
    if method == SolveMethod::Cholesky && !(residual <= opts.tol) {
        return Err(Error::NoConvergence { iterations: 0, residual: residual.to_f64_lossy() });
    }
    let report = SolveReport { free_dofs: n, iterations, residual: residual.to_f64_lossy(), wall_time: start.elapsed(), method };
    Ok((x, report))
}

fn relative_residual<T: Real>(a: &CsrMatrix<T>, b: &[T], x: &[T]) -> T {
    let bn = norm2(b);
    if bn == T::zero() {
        return norm2(x);
    }
    let ax = a.mul_vec(x);
    let r: Vec<T> = b.iter().zip(&ax).map(|(&b, &a)| b - a).collect();
    norm2(&r) / bn
}

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
/// Returns the solution and the iteration count. Convergence is declared on
/// the true residual.
pub fn conjugate_gradient<T: Real>(a: &CsrMatrix<T>, b: &[T], opts: &SolverOptions<T>) -> Result<(Vec<T>, usize)> {
    let n = b.len();
    if a.dim() != n {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: n });
    }
    let mut x = vec![T::zero(); n];
    let bn = norm2(b);
    if bn == T::zero() {
        return Ok((x, 0));
    }
    let diag = a.diagonal();
    let mut dinv = Vec::with_capacity(n);
    for (i, &d) in diag.iter().enumerate() {
        if !(d > T::zero()) {
            return Err(Error::NotPositiveDefinite { step: i, curvature: d.to_f64_lossy() });
        }
        dinv.push(T::one() / d);
    }
    let dmax = diag.iter().fold(T::zero(), |m, &d| m.max(d));
    let max_it = opts.max_iterations.unwrap_or(n + 1000);
    let mut r = b.to_vec();
    let mut z: Vec<T> = r.iter().zip(&dinv).map(|(&r, &d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![T::zero(); n];
    let mut it = 0;
    while it < max_it {
        it += 1;
        a.mul_vec_into(&p, &mut q);
        let pq = dot(&p, &q);
        let pp = dot(&p, &p);
        if !(pq > T::epsilon() * T::lit(16.0) * dmax * pp) {
            return Err(Error::NotPositiveDefinite { step: it, curvature: (pq / pp).to_f64_lossy() });
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        if norm2(&r) <= opts.tol * bn {
            // replace the recursive residual by the true one
            a.mul_vec_into(&x, &mut q);
            for i in 0..n {
                r[i] = b[i] - q[i];
            }
            if norm2(&r) <= opts.tol * bn {
                return Ok((x, it));
            }
            for i in 0..n {
                z[i] = r[i] * dinv[i];
            }
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
            continue;
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence { iterations: it, residual: (norm2(&r) / bn).to_f64_lossy() })
}

/// Dense Cholesky solve; fails on a non-positive pivot.
pub fn dense_cholesky_solve<T: Real>(a: &CsrMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    DenseCholesky::factor(a)?.solve(b)
}

/// Dense lower factor `L` with `A = L L^T`, row-major.
#[derive(Debug, Clone)]
pub struct DenseCholesky<T> {
    n: usize,
    l: Vec<T>,
}

impl<T: Real> DenseCholesky<T> {
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self> {
        let n = a.dim();
        let mut l = vec![T::zero(); n * n];
        let mut dmax = T::zero();
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j <= i {
                    l[i * n + j] = v;
                }
                if j == i {
                    dmax = dmax.max(v.abs());
                }
            }
        }
        let floor = T::epsilon() * T::lit(64.0) * dmax;
        for j in 0..n {
            let rj = j * n;
            let d = l[rj + j] - dot(&l[rj..rj + j], &l[rj..rj + j]);
            if !(d > floor) {
                return Err(Error::NotPositiveDefinite { step: j, curvature: d.to_f64_lossy() });
            }
            let d = d.sqrt();
            l[rj + j] = d;
            for i in j + 1..n {
                let ri = i * n;
                let s = l[ri + j] - dot(&l[ri..ri + j], &l[rj..rj + j]);
                l[ri + j] = s / d;
            }
        }
        Ok(Self { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let (n, l) = (self.n, &self.l);
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.len() });
        }
        let mut y = b.to_vec();
        for i in 0..n {
            let s = y[i] - dot(&l[i * n..i * n + i], &y[..i]);
            y[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[k * n + i] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        Ok(y)
    }
}

/// A symmetric positive definite matrix prepared for repeated solves: dense
/// factor below the threshold, Jacobi CG otherwise.
#[derive(Debug, Clone)]
pub struct SpdSolver<T> {
    matrix: CsrMatrix<T>,
    dense: Option<DenseCholesky<T>>,
    opts: SolverOptions<T>,
}

impl<T: Real> SpdSolver<T> {
    pub fn new(matrix: CsrMatrix<T>, opts: SolverOptions<T>) -> Result<Self> {
        opts.validate()?;
        let dense = if matrix.dim() < opts.dense_threshold { Some(DenseCholesky::factor(&matrix)?) } else { None };
        Ok(Self { matrix, dense, opts })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.matrix
    }

    /// Solution and CG iteration count (0 when factored).
    pub fn solve(&self, b: &[T]) -> Result<(Vec<T>, usize)> {
        let (x, it) = match &self.dense {
            Some(f) => (f.solve(b)?, 0),
            None => conjugate_gradient(&self.matrix, b, &self.opts)?,
        };
        let residual = relative_residual(&self.matrix, b, &x);
        if !(residual <= self.opts.tol) {
            return Err(Error::NoConvergence { iterations: it, residual: residual.to_f64_lossy() });
        }
        Ok((x, it))
    }
}

/// The four stationary problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    /// Sharp interface with prescribed slip.
    LimitUncoupled,
    /// Sharp interface with slip unknown.
    LimitCoupled,
    /// Fault strip with prescribed slip.
    EpsUncoupled,
    /// Fault strip with slip unknown.
    EpsCoupled,
}

impl ProblemKind {
    pub fn is_sharp(self) -> bool {
        matches!(self, Self::LimitUncoupled | Self::LimitCoupled)
    }

    pub fn is_coupled(self) -> bool {
        matches!(self, Self::LimitCoupled | Self::EpsCoupled)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::LimitUncoupled => "limit-uncoupled",
            Self::LimitCoupled => "limit-coupled",
            Self::EpsUncoupled => "eps-uncoupled",
            Self::EpsCoupled => "eps-coupled",
        }
    }
}

/// Data of a stationary problem. Missing callables mean zero data.
#[derive(Clone, Copy, Default)]
pub struct LoadCase<'a, T> {
    /// `f`, evaluated with a side hint.
    pub body_force: Option<BodyForce<'a, T>>,
    /// `f0`, coupled problems only.
    pub slip_source: Option<LineFunction<'a, T>>,
    /// Prescribed slip, uncoupled problems only.
    pub slip_data: Option<LineFunction<'a, T>>,
    /// Dirichlet values on `y = +-1` (and `x = +-1` when clamped).
    pub boundary: Option<Displacement<'a, T>>,
    /// Stress whose traction is applied on `x = +-1`.
    pub side_stress: Option<StressField<'a, T>>,
    /// Dirichlet instead of traction conditions on `x = +-1`.
    pub clamp_sides: bool,
}

#[derive(Debug, Clone)]
pub struct StationarySolution<T> {
    pub kind: ProblemKind,
    pub disc: Discretization<T>,
    pub materials: MaterialField<T>,
    /// Full coefficient vector including prescribed values.
    pub coeffs: Vec<T>,
    pub report: SolveReport,
}

impl<T: Real> StationarySolution<T> {
    /// Quadratic energy of the solution, with the slip from the solution
    /// (coupled) or `slip` (uncoupled).
    pub fn energy(&self, slip: Option<LineFunction<'_, T>>) -> Result<T> {
        let s = match (self.kind.is_coupled(), slip) {
            (true, _) => Slip::Discrete,
            (false, Some(g)) => Slip::Given(g),
            (false, None) => Slip::Zero,
        };
        energy_of(&self.disc, &self.materials, &self.coeffs, s, self.kind)
    }
}

fn check_kind<T: Real>(kind: ProblemKind, disc: &Discretization<T>) -> Result<()> {
    let mesh = disc.mesh();
    if kind.is_sharp() != mesh.is_sharp() {
        return Err(Error::WrongMeshKind { expected: if kind.is_sharp() { "sharp-interface (eps = 0)" } else { "thin-fault (eps > 0)" } });
    }
    if kind.is_coupled() != disc.dofs().has_gamma() {
        return Err(Error::InvalidConfig(format!("{} needs slip dofs: {}", kind.name(), kind.is_coupled())));
    }
    Ok(())
}

/// Stiffness matrix of `kind` on all dofs.
pub fn assemble_operator<T: Real>(kind: ProblemKind, disc: &Discretization<T>, mat: &MaterialField<T>) -> Result<CsrMatrix<T>> {
    check_kind(kind, disc)?;
    let (mesh, dofs) = (disc.mesh(), disc.dofs());
    let mut t = assemble_bulk_elasticity(mesh, dofs, mat, true)?;
    match kind {
        ProblemKind::LimitUncoupled | ProblemKind::LimitCoupled => t.extend(assemble_interface_coupling(mesh, dofs, mat)?),
        ProblemKind::EpsCoupled => t.extend(assemble_eps_fault_coupling(mesh, dofs, mat)?),
        ProblemKind::EpsUncoupled => {}
    }
    Ok(t.into_csr())
}

/// Right-hand side of `kind` on all dofs, before Dirichlet elimination.
pub fn assemble_rhs<T: Real>(kind: ProblemKind, disc: &Discretization<T>, mat: &MaterialField<T>, load: &LoadCase<'_, T>) -> Result<Vec<T>> {
    check_kind(kind, disc)?;
    let (mesh, dofs) = (disc.mesh(), disc.dofs());
    if kind.is_coupled() && load.slip_data.is_some() {
        return Err(Error::InvalidConfig("prescribed slip given for a coupled problem".into()));
    }
    if !kind.is_coupled() && load.slip_source.is_some() {
        return Err(Error::InvalidConfig("slip source given for an uncoupled problem".into()));
    }
    let mut rhs = assemble_load(mesh, dofs, mat, load.body_force, load.slip_source)?;
    if let Some(g) = load.slip_data {
        add(&mut rhs, &assemble_slip_data_load(mesh, dofs, mat, g)?);
    }
    if let (Some(s), false) = (load.side_stress, load.clamp_sides) {
        add(&mut rhs, &assemble_side_traction(mesh, dofs, s)?);
    }
    Ok(rhs)
}

fn add<T: Real>(a: &mut [T], b: &[T]) {
    for (x, &y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

/// Assembles, eliminates Dirichlet dofs and solves `kind` on `disc`.
pub fn solve_stationary<T: Real>(
    kind: ProblemKind,
    mut disc: Discretization<T>,
    materials: MaterialField<T>,
    load: &LoadCase<'_, T>,
    opts: &SolverOptions<T>,
) -> Result<StationarySolution<T>> {
    if load.clamp_sides {
        let mesh = disc.mesh().clone();
        disc.dofs_mut().constrain_side_walls(&mesh);
    }
    let k = assemble_operator(kind, &disc, &materials)?;
    let rhs = assemble_rhs(kind, &disc, &materials, load)?;
    let prescribed = match load.boundary {
        Some(b) => {
            let mut v = disc.interpolate(b, None);
            for (i, c) in disc.dofs().constrained().iter().enumerate() {
                if !c {
                    v[i] = T::zero();
                }
            }
            v
        }
        None => vec![T::zero(); disc.dofs().n_dofs()],
    };
    let full = SparseSystem::new(k, rhs)?;
    let reduced = apply_dirichlet(&full, disc.dofs().constrained(), &prescribed)?;
    let (x, report) = solve_spd_with(&reduced, opts)?;
    let coeffs = reduced.expand(&x, &prescribed);
    Ok(StationarySolution { kind, disc, materials, coeffs, report })
}

fn uniform(n: usize, geom: FaultGeometry<f64>, coupled: bool, coeffs: &Coefficients<f64>) -> Result<(Discretization<f64>, MaterialField<f64>)> {
    coeffs.validate()?;
    let disc = Discretization::new(n, geom, coupled)?;
    let mat = MaterialField::uniform(*coeffs, disc.mesh())?;
    Ok((disc, mat))
}

/// Sharp-interface problem with the slip `load.slip_data` (zero if absent).
pub fn solve_limit_uncoupled(
    n: usize,
    coeffs: &Coefficients<f64>,
    load: &LoadCase<'_, f64>,
    opts: &SolverOptions<f64>,
) -> Result<StationarySolution<f64>> {
    let (disc, mat) = uniform(n, FaultGeometry::sharp(), false, coeffs)?;
    solve_stationary(ProblemKind::LimitUncoupled, disc, mat, load, opts)
}

/// Sharp-interface problem with slip solved monolithically.
pub fn solve_limit_coupled(
    n: usize,
    coeffs: &Coefficients<f64>,
    load: &LoadCase<'_, f64>,
    opts: &SolverOptions<f64>,
) -> Result<StationarySolution<f64>> {
    let (disc, mat) = uniform(n, FaultGeometry::sharp(), true, coeffs)?;
    solve_stationary(ProblemKind::LimitCoupled, disc, mat, load, opts)
}

/// Thin-fault problem of width `eps`.
pub fn solve_eps_stationary(
    n: usize,
    eps: f64,
    coeffs: &Coefficients<f64>,
    load: &LoadCase<'_, f64>,
    coupled: bool,
    opts: &SolverOptions<f64>,
) -> Result<StationarySolution<f64>> {
    if eps <= 0.0 {
        return Err(Error::InvalidGeometry(format!("thin-fault problem needs eps > 0, got {eps}")));
    }
    let (disc, mat) = uniform(n, FaultGeometry::new(eps)?, coupled, coeffs)?;
    let kind = if coupled { ProblemKind::EpsCoupled } else { ProblemKind::EpsUncoupled };
    solve_stationary(kind, disc, mat, load, opts)
}

/// Slip entering an energy evaluation.
#[derive(Clone, Copy)]
pub enum Slip<'a, T> {
    Zero,
    /// Read from the slip dofs of the coefficient vector.
    Discrete,
    Given(LineFunction<'a, T>),
}

/// Quadratic energy by direct quadrature. Sharp meshes:
/// `int W(grad u) + 1/2 int mu ([u1] - gamma)^2`; thin faults: `W` with the
/// fault gradient in the strip. Coupled kinds add `1/2 ell(gamma, gamma)`,
/// averaged across the strip for thin faults.
pub fn energy_of<T: Real>(disc: &Discretization<T>, mat: &MaterialField<T>, coeffs: &[T], slip: Slip<'_, T>, kind: ProblemKind) -> Result<T> {
    energy_with_scaling(disc, mat, coeffs, slip, kind.is_coupled(), T::half())
}

/// [`energy_of`] with the fault gradient scaled by `eps^theta`.
pub fn energy_with_scaling<T: Real>(
    disc: &Discretization<T>,
    mat: &MaterialField<T>,
    coeffs: &[T],
    slip: Slip<'_, T>,
    include_slip_energy: bool,
    theta: T,
) -> Result<T> {
    let (mesh, dofs) = (disc.mesh(), disc.dofs());
    if coeffs.len() != dofs.n_dofs() {
        return Err(Error::DimensionMismatch { expected: dofs.n_dofs(), found: coeffs.len() });
    }
    if matches!(slip, Slip::Discrete) && !dofs.has_gamma() {
        return Err(Error::InvalidConfig("discrete slip requested without slip dofs".into()));
    }
    let slip_at = |c: usize, xi: T, x: T| -> (T, T) {
        match slip {
            Slip::Zero => (T::zero(), T::zero()),
            Slip::Given(g) => (g(x), T::zero()),
            Slip::Discrete => {
                let g = dofs.segment_gamma_dofs(c).expect("slip dofs checked");
                let (m, dm) = line3(xi);
                let w = T::two() / mesh.element_width();
                (0..3).fold((T::zero(), T::zero()), |(v, d), a| (v + coeffs[g[a]] * m[a], d + coeffs[g[a]] * dm[a] * w))
            }
        }
    };
    let quad = ElementQuadrature::new(NORM_ORDER)?;
    let eps = mesh.eps();
    let mut total = T::zero();
    for (e, el) in mesh.elements().iter().enumerate() {
        let c = mat.cell(e);
        let mut sum = T::zero();
        for q in 0..quad.len() {
            let [xi, eta] = quad.reference_point(q);
            let p = disc.eval(coeffs, e, xi, eta);
            let w = quad.eval(el, q).jxw;
            let a = match el.region {
                Region::Bulk => p.grad,
                Region::Fault => fault_gradient(&p.grad, slip_at(el.col, xi, p.x).0, eps, theta),
            };
            let mut density = strain_energy_density(&a, c.mu, c.lambda);
            if el.region == Region::Fault && include_slip_energy {
                let (g, gx) = slip_at(el.col, xi, p.x);
                density += T::half() / eps * (c.eta_hat * g * g + c.nu * gx * gx);
            }
            sum += w * density;
        }
        total += sum;
    }
    if mesh.is_sharp() {
        let pairs = dofs.interface_trace_dofs()?;
        let rule = GaussRule1d::new(NORM_ORDER)?;
        let ncols = mesh.columns();
        let above = mesh.elements().iter().step_by(ncols).position(|el| el.side == crate::geometry::Side::Plus).unwrap_or(0);
        for col in 0..ncols {
            let xs = mesh.node_columns();
            let c = mat.cell(above * ncols + col);
            for (k, p) in segment_points(&rule, xs[2 * col], xs[2 * col + 2]).iter().enumerate() {
                let xi = rule.points[k];
                let jump = (0..3).fold(T::zero(), |j, a| {
                    let pr = pairs[2 * col + a];
                    j + (coeffs[pr.plus] - coeffs[pr.minus]) * p.m[a]
                });
                let (g, gx) = slip_at(col, xi, p.x);
                let mut density = T::half() * c.mu * (jump - g) * (jump - g);
                if include_slip_energy {
                    density += T::half() * (c.eta_hat * g * g + c.nu * gx * gx);
                }
                total += p.w * density;
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::sparse::Triplets;
    use crate::geometry::Side;
    use approx::assert_relative_eq;

    fn poisson(n: usize) -> CsrMatrix<f64> {
        let mut t = Triplets::new(n);
        for i in 0..n {
            t.push(i, i, 2.0);
            if i > 0 {
                t.push(i, i - 1, -1.0);
                t.push(i - 1, i, -1.0);
            }
        }
        t.into_csr()
    }

    fn cg_only() -> SolverOptions<f64> {
        SolverOptions { dense_threshold: 0, ..SolverOptions::default() }
    }

    #[test]
    fn identity_in_one_iteration() {
        let b = vec![1.0, -2.0, 3.5];
        let sys = SparseSystem::new(CsrMatrix::identity(3), b.clone()).unwrap();
        let (x, rep) = solve_spd_with(&sys, &cg_only()).unwrap();
        assert_eq!(x, b);
        assert_eq!(rep.iterations, 1);
        assert_eq!(rep.method, SolveMethod::ConjugateGradient);
        let (x, rep) = solve_spd(&sys, 1e-12).unwrap();
        assert_eq!(x, b);
        assert_eq!(rep.method, SolveMethod::Cholesky);
    }

    #[test]
    fn three_dof_poisson_against_closed_form() {
        // inverse of tridiag(-1, 2, -1) of size 3
        let inv = [[0.75, 0.5, 0.25], [0.5, 1.0, 0.5], [0.25, 0.5, 0.75]];
        let b = [1.0, 0.3, -2.0];
        let expect: Vec<f64> = (0..3).map(|i| (0..3).map(|j| inv[i][j] * b[j]).sum()).collect();
        let sys = SparseSystem::new(poisson(3), b.to_vec()).unwrap();
        for opts in [cg_only(), SolverOptions::default()] {
            let (x, rep) = solve_spd_with(&sys, &opts).unwrap();
            for i in 0..3 {
                assert_relative_eq!(x[i], expect[i], epsilon = 1e-12);
            }
            assert!(rep.residual <= 1e-12);
        }
    }

    #[test]
    fn larger_poisson_cg_matches_cholesky() {
        let sys = SparseSystem::new(poisson(200), (0..200).map(|i| ((i * 7) % 13) as f64 - 6.0).collect()).unwrap();
        let (a, _) = solve_spd_with(&sys, &cg_only()).unwrap();
        let (b, _) = solve_spd(&sys, 1e-12).unwrap();
        for i in 0..200 {
            assert_relative_eq!(a[i], b[i], epsilon = 1e-8, max_relative = 1e-9);
        }
    }

    #[test]
    fn singular_and_indefinite_systems_fail() {
        // Neumann Laplacian: constants in the kernel
        let mut t = Triplets::new(3);
        for (i, j, v) in [(0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0), (1, 2, -1.0), (2, 1, -1.0), (2, 2, 1.0)] {
            t.push(i, j, v);
        }
        let sys = SparseSystem::new(t.into_csr(), vec![1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(solve_spd(&sys, 1e-12), Err(Error::NotPositiveDefinite { .. })));
        assert!(solve_spd_with(&sys, &cg_only()).is_err());
        let neg = SparseSystem::new(CsrMatrix::identity(2).scaled(-1.0), vec![1.0, 1.0]).unwrap();
        assert!(matches!(solve_spd_with(&neg, &cg_only()), Err(Error::NotPositiveDefinite { .. })));
        assert!(matches!(solve_spd(&neg, 1e-3), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let c = Coefficients::reference();
        let opts = SolverOptions::default();
        let s = solve_limit_uncoupled(2, &c, &LoadCase::default(), &opts).unwrap();
        assert!(s.coeffs.iter().all(|&v| v == 0.0));
        let s = solve_eps_stationary(2, 0.1, &c, &LoadCase::default(), true, &opts).unwrap();
        assert!(s.coeffs.iter().all(|&v| v == 0.0));
        assert_eq!(s.energy(None).unwrap(), 0.0);
    }

    #[test]
    fn patch_test_reproduces_affine_field() {
        // continuous affine field; the interface law mu ([u1] - gamma) = T12
        // holds with zero jump when gamma = -T12 / mu
        let c = Coefficients::reference();
        for (b, g) in [(0.2, 0.0), (0.5, -0.3)] {
            let affine = move |x: f64, y: f64, _: Side| [0.1 + 0.3 * x - 0.2 * y, -0.4 + b * x + 0.7 * y];
            let grad = [[0.3, -0.2], [b, 0.7]];
            let sigma = crate::fem::elasticity::stress(&grad, c.mu, c.lambda);
            let stress = move |_: f64, _: f64, _: Side| sigma;
            let gamma = move |_: f64| g;
            for clamp in [true, false] {
                let load = LoadCase {
                    boundary: Some(&affine),
                    side_stress: Some(&stress),
                    slip_data: Some(&gamma),
                    clamp_sides: clamp,
                    ..LoadCase::default()
                };
                let s = solve_limit_uncoupled(2, &c, &load, &SolverOptions::default()).unwrap();
                let exact = s.disc.interpolate(&affine, None);
                for (a, e) in s.coeffs.iter().zip(&exact) {
                    assert!((a - e).abs() < 1e-12, "b {b} clamp {clamp}: {a} vs {e}");
                }
            }
        }
    }

    #[test]
    fn wrong_problem_shapes_are_rejected() {
        let c = Coefficients::reference();
        let disc = Discretization::new(2, FaultGeometry::sharp(), false).unwrap();
        let mat = MaterialField::uniform(c, disc.mesh()).unwrap();
        assert!(matches!(assemble_operator(ProblemKind::EpsUncoupled, &disc, &mat), Err(Error::WrongMeshKind { .. })));
        assert!(matches!(assemble_operator(ProblemKind::LimitCoupled, &disc, &mat), Err(Error::InvalidConfig(_))));
        let f0 = |_: f64| 1.0;
        let load = LoadCase { slip_source: Some(&f0), ..LoadCase::default() };
        assert!(solve_limit_uncoupled(2, &c, &load, &SolverOptions::default()).is_err());
    }

    #[test]
    fn energy_matches_matrix_form() {
        let c = Coefficients { nu: 0.3, ..Coefficients::reference() };
        for kind in [ProblemKind::LimitUncoupled, ProblemKind::LimitCoupled, ProblemKind::EpsUncoupled, ProblemKind::EpsCoupled] {
            let geom = if kind.is_sharp() { FaultGeometry::sharp() } else { FaultGeometry::new(0.15).unwrap() };
            let disc = Discretization::new(2, geom, kind.is_coupled()).unwrap();
            let mat = MaterialField::uniform(c, disc.mesh()).unwrap();
            let k = assemble_operator(kind, &disc, &mat).unwrap();
            let v: Vec<f64> = (0..disc.dofs().n_dofs()).map(|i| (i * 37 % 101) as f64 / 50.0 - 1.0).collect();
            let slip = if kind.is_coupled() { Slip::Discrete } else { Slip::Zero };
            let e = energy_of(&disc, &mat, &v, slip, kind).unwrap();
            assert_relative_eq!(e, 0.5 * k.quadratic_form(&v), max_relative = 1e-12);
        }
    }
}
