//! Time integration of elastodynamics coupled to first-order slip dynamics,
//! `M u'' + C u' + K (u, gamma) = F` and `B gamma' + K (u, gamma) = F0`.
//!
//! Displacements advance by the trapezoidal Newmark rule and the slip by
//! Crank-Nicolson, solved as one symmetric system per step. For this linear
//! system the discrete energy balance
//! `E(n+1) - E(n) = work - dissipation`, with
//! `E = 1/2 v'Mv + 1/2 z'Kz`, holds exactly.

use std::io::{self, Write};

use crate::analysis::Lifted;
use crate::error::{Error, Result};
use crate::fem::assembly::{assemble_bulk_elasticity, assemble_mass, assemble_slip_mass, LineFunction};
use crate::fem::sparse::CsrMatrix;
use crate::field::{Discretization, Displacement};
use crate::geometry::{FaultGeometry, Side};
use crate::manufactured::ExactSolution;
use crate::material::{Coefficients, MaterialField};
use crate::report::sci;
use crate::scalar::{dot, Real};
use crate::solvers::{assemble_operator, assemble_rhs, LoadCase, ProblemKind, SolverOptions, SpdSolver};

/// Rayleigh damping `C = mass M + stiffness K_elastic` on displacements.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Damping<T> {
    pub mass: T,
    pub stiffness: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeConfig<T> {
    pub dt: T,
    pub t_final: T,
    /// Relative residual of each step's linear solve.
    pub tol: T,
    pub damping: Damping<T>,
    /// Keep the slip at its initial values.
    pub frozen_slip: bool,
    /// Keep every `sample_every`-th state in the trajectory.
    pub sample_every: usize,
}

impl<T: Real> TimeConfig<T> {
    pub fn new(dt: T, t_final: T) -> Self {
        Self { dt, t_final, tol: T::lit(1e-12), damping: Damping::default(), frozen_slip: false, sample_every: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= self.dt && self.t_final.is_finite()) {
            return Err(Error::InvalidConfig(format!("final time {} shorter than one step {}", self.t_final, self.dt)));
        }
        if !(self.damping.mass >= T::zero() && self.damping.stiffness >= T::zero()) {
            return Err(Error::InvalidConfig("damping coefficients must be nonnegative".into()));
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidConfig("sample interval must be at least 1".into()));
        }
        Ok(())
    }

    /// Steps needed to reach `t_final`, rounding to the nearest step.
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round().to_usize().unwrap_or(0).max(1)
    }
}

/// Displacement `u` and velocity `v` in the layout of the dof map; the slip
/// dofs of `u` hold the slip and those of `v` the slip rate of the last step.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState<T> {
    pub t: T,
    pub u: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Real> EvolutionState<T> {
    pub fn zeros(n_dofs: usize) -> Self {
        Self { t: T::zero(), u: vec![T::zero(); n_dofs], v: vec![T::zero(); n_dofs] }
    }

    /// Slip values at the slip nodes.
    pub fn gamma(&self, disc: &Discretization<T>) -> Vec<T> {
        disc.dofs().gamma_dofs().iter().map(|&d| self.u[d]).collect()
    }
}

/// Initial data; absent entries are zero.
#[derive(Clone, Copy, Default)]
pub struct InitialData<'a, T> {
    pub u: Option<Displacement<'a, T>>,
    pub v: Option<Displacement<'a, T>>,
    pub gamma: Option<LineFunction<'a, T>>,
}

/// Spatial load scaled by a time profile (constant 1 if absent).
#[derive(Clone, Copy, Default)]
pub struct Forcing<'a, T> {
    pub load: LoadCase<'a, T>,
    pub profile: Option<&'a dyn Fn(T) -> T>,
}

struct ExactFn<'a, T>(Displacement<'a, T>);

impl<T: Real> ExactSolution<T> for ExactFn<'_, T> {
    fn displacement(&self, x: T, y: T, side: Side) -> [T; 2] {
        (self.0)(x, y, side)
    }

    fn gradient(&self, _: T, _: T, _: Side) -> [[T; 2]; 2] {
        [[T::zero(); 2]; 2]
    }
}

/// State at `t = 0`. On a thin-fault mesh the displacement is given on the
/// sharp-interface configuration and its first component lifted across the
/// strip; velocities vanish on constrained dofs.
pub fn init_state<T: Real>(disc: &Discretization<T>, data: &InitialData<'_, T>) -> Result<EvolutionState<T>> {
    let n = disc.dofs().n_dofs();
    let mut s = EvolutionState::zeros(n);
    if let Some(u0) = data.u {
        s.u = if disc.mesh().is_sharp() {
            disc.interpolate(u0, None)
        } else {
            let base = ExactFn(u0);
            let lift = Lifted::new(&base, disc.mesh().eps())?;
            disc.interpolate(&|x, y, side| lift.displacement(x, y, side), None)
        };
    }
    if let Some(g) = data.gamma {
        if !disc.dofs().has_gamma() {
            return Err(Error::InvalidConfig("initial slip given without slip dofs".into()));
        }
        for (i, &x) in disc.dofs().gamma_nodes_x().iter().enumerate() {
            s.u[disc.dofs().gamma(i)] = g(x);
        }
    }
    if let Some(v0) = data.v {
        s.v = disc.interpolate(v0, None);
    }
    for (i, &c) in disc.dofs().constrained().iter().enumerate() {
        if c {
            s.v[i] = T::zero();
        }
    }
    for &d in disc.dofs().gamma_dofs() {
        s.v[d] = T::zero();
    }
    if !s.u.iter().chain(&s.v).all(|v| v.is_finite()) {
        return Err(Error::InvalidConfig("initial data is not finite".into()));
    }
    Ok(s)
}

/// Energy bookkeeping of one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditRow {
    /// Time at the end of the step.
    pub t: f64,
    pub kinetic: f64,
    pub potential: f64,
    /// `dgamma' B dgamma / dt + dt vbar' C vbar`, nonnegative.
    pub dissipation: f64,
    /// `dz' Fbar`.
    pub work: f64,
    /// `E(n+1) - E(n) - work + dissipation`.
    pub residual: f64,
}

/// Assembled operators of a time-dependent problem.
#[derive(Debug, Clone)]
pub struct Evolution<T> {
    kind: ProblemKind,
    disc: Discretization<T>,
    stiffness: CsrMatrix<T>,
    mass: CsrMatrix<T>,
    slip_mass: Option<CsrMatrix<T>>,
    damping: CsrMatrix<T>,
    load: Vec<T>,
    free: Vec<usize>,
    solver: SpdSolver<T>,
    cfg: TimeConfig<T>,
}

impl<T: Real> Evolution<T> {
    pub fn new(kind: ProblemKind, disc: Discretization<T>, mat: &MaterialField<T>, load: &LoadCase<'_, T>, cfg: TimeConfig<T>) -> Result<Self> {
        cfg.validate()?;
        if load.clamp_sides || load.boundary.is_some() {
            return Err(Error::InvalidConfig("time-dependent runs keep the initial values on constrained dofs".into()));
        }
        let (mesh, dofs) = (disc.mesh(), disc.dofs());
        let stiffness = assemble_operator(kind, &disc, mat)?;
        let load_vec = assemble_rhs(kind, &disc, mat, load)?;
        let mass = assemble_mass(mesh, dofs, mat)?.into_csr();
        let slip_mass = if dofs.has_gamma() { Some(assemble_slip_mass(mesh, dofs, mat)?.into_csr()) } else { None };
        let elastic = assemble_bulk_elasticity(mesh, dofs, mat, true)?.into_csr();
        let damping = mass.scaled(cfg.damping.mass).add_scaled(cfg.damping.stiffness, &elastic);

        let is_gamma = {
            let mut v = vec![false; dofs.n_dofs()];
            for &d in dofs.gamma_dofs() {
                v[d] = true;
            }
            v
        };
        let free: Vec<usize> = (0..dofs.n_dofs()).filter(|&i| !dofs.is_constrained(i) && !(cfg.frozen_slip && is_gamma[i])).collect();
        let dt = cfg.dt;
        let mut step = stiffness.scaled(T::half()).add_scaled(T::two() / (dt * dt), &mass).add_scaled(T::one() / dt, &damping);
        if let Some(b) = &slip_mass {
            step = step.add_scaled(T::one() / dt, b);
        }
        let opts = SolverOptions::with_tol(cfg.tol);
        let solver = SpdSolver::new(step.submatrix(&free), opts)?;
        Ok(Self { kind, disc, stiffness, mass, slip_mass, damping, load: load_vec, free, solver, cfg })
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn discretization(&self) -> &Discretization<T> {
        &self.disc
    }

    pub fn config(&self) -> &TimeConfig<T> {
        &self.cfg
    }

    /// Size of the linear system solved per step.
    pub fn free_dofs(&self) -> usize {
        self.free.len()
    }

    fn load_at(&self, profile: Option<&dyn Fn(T) -> T>, t: T) -> Vec<T> {
        let s = profile.map_or(T::one(), |p| p(t));
        self.load.iter().map(|&f| f * s).collect()
    }

    fn check(&self, s: &EvolutionState<T>) -> Result<()> {
        let n = self.disc.dofs().n_dofs();
        for len in [s.u.len(), s.v.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, found: len });
            }
        }
        Ok(())
    }

    /// Advances `s` by one step of length `dt`.
    pub fn step(&self, s: &EvolutionState<T>, profile: Option<&dyn Fn(T) -> T>) -> Result<EvolutionState<T>> {
        self.step_signed(s, profile, false)
    }

    /// One step backwards in time; exact inverse of [`Self::step`] for
    /// undamped runs with frozen slip.
    pub fn step_back(&self, s: &EvolutionState<T>, profile: Option<&dyn Fn(T) -> T>) -> Result<EvolutionState<T>> {
        if self.cfg.damping != Damping::default() || (self.slip_mass.is_some() && !self.cfg.frozen_slip) {
            return Err(Error::InvalidConfig("backward steps need an undamped run with frozen slip".into()));
        }
        self.step_signed(s, profile, true)
    }

    fn step_signed(&self, s: &EvolutionState<T>, profile: Option<&dyn Fn(T) -> T>, backward: bool) -> Result<EvolutionState<T>> {
        self.check(s)?;
        let dt = self.cfg.dt;
        // time reversal of an undamped trapezoidal step: flip the velocity
        let v0: Vec<T> = if backward { s.v.iter().map(|&v| -v).collect() } else { s.v.clone() };
        let t1 = if backward { s.t - dt } else { s.t + dt };
        let f0 = self.load_at(profile, s.t);
        let f1 = self.load_at(profile, t1);
        let kz = self.stiffness.mul_vec(&s.u);
        let mv = self.mass.mul_vec(&v0);
        let scale = T::two() / dt;
        let rhs: Vec<T> = self.free.iter().map(|&i| T::half() * (f0[i] + f1[i]) - kz[i] + scale * mv[i]).collect();
        let (delta, _) = self.solver.solve(&rhs)?;
        let mut next = EvolutionState { t: t1, u: s.u.clone(), v: vec![T::zero(); s.v.len()] };
        let mut du = vec![T::zero(); s.u.len()];
        for (k, &i) in self.free.iter().enumerate() {
            du[i] = delta[k];
            next.u[i] += delta[k];
        }
        for i in 0..s.v.len() {
            next.v[i] = if self.disc.dofs().is_constrained(i) { T::zero() } else { scale * du[i] - v0[i] };
        }
        for &d in self.disc.dofs().gamma_dofs() {
            next.v[d] = du[d] / dt;
        }
        if backward {
            for (i, v) in next.v.iter_mut().enumerate() {
                if !self.disc.dofs().is_constrained(i) {
                    *v = -*v;
                }
            }
        }
        if !next.u.iter().chain(&next.v).all(|v| v.is_finite()) {
            return Err(Error::NoConvergence { iterations: 0, residual: f64::INFINITY });
        }
        Ok(next)
    }

    /// `(1/2 v'Mv, 1/2 z'Kz)`.
    pub fn energy(&self, s: &EvolutionState<T>) -> (T, T) {
        (T::half() * self.mass.quadratic_form(&s.v), T::half() * self.stiffness.quadratic_form(&s.u))
    }

    fn audit_pair(&self, a: &EvolutionState<T>, b: &EvolutionState<T>, profile: Option<&dyn Fn(T) -> T>) -> AuditRow {
        let dt = b.t - a.t;
        let dz: Vec<T> = b.u.iter().zip(&a.u).map(|(&x, &y)| x - y).collect();
        let fa = self.load_at(profile, a.t);
        let fb = self.load_at(profile, b.t);
        let fbar: Vec<T> = fa.iter().zip(&fb).map(|(&x, &y)| T::half() * (x + y)).collect();
        let work = dot(&dz, &fbar);
        let mut vbar: Vec<T> = a.v.iter().zip(&b.v).map(|(&x, &y)| T::half() * (x + y)).collect();
        for &d in self.disc.dofs().gamma_dofs() {
            vbar[d] = T::zero();
        }
        let mut dissipation = dt.abs() * self.damping.quadratic_form(&vbar);
        if let Some(bm) = &self.slip_mass {
            dissipation += bm.quadratic_form(&dz) / dt.abs();
        }
        let (ka, pa) = self.energy(a);
        let (kb, pb) = self.energy(b);
        let residual = (kb + pb) - (ka + pa) - work + dissipation;
        AuditRow {
            t: b.t.to_f64_lossy(),
            kinetic: kb.to_f64_lossy(),
            potential: pb.to_f64_lossy(),
            dissipation: dissipation.to_f64_lossy(),
            work: work.to_f64_lossy(),
            residual: residual.to_f64_lossy(),
        }
    }
}

/// Energy bookkeeping of consecutive states.
pub fn energy_audit<T: Real>(evol: &Evolution<T>, states: &[EvolutionState<T>], profile: Option<&dyn Fn(T) -> T>) -> Result<Vec<AuditRow>> {
    if states.len() < 2 {
        return Err(Error::InvalidConfig("an energy audit needs at least two states".into()));
    }
    states.iter().try_for_each(|s| evol.check(s))?;
    Ok(states.windows(2).map(|w| evol.audit_pair(&w[0], &w[1], profile)).collect())
}

#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    /// Initial state, every `sample_every`-th state and the final state.
    pub samples: Vec<EvolutionState<T>>,
    /// One row per step.
    pub audit: Vec<AuditRow>,
    pub initial_energy: f64,
}

impl<T: Real> Trajectory<T> {
    pub fn final_state(&self) -> &EvolutionState<T> {
        self.samples.last().expect("trajectories hold the initial state")
    }

    /// Audit rows as CSV with displacements at `probes` (sampled steps only;
    /// other rows leave the probe columns empty).
    pub fn write_csv<W: Write>(&self, disc: &Discretization<T>, probes: &[(T, T)], mut out: W) -> io::Result<()> {
        write!(out, "t,kinetic,potential,dissipation,work,residual")?;
        for k in 0..probes.len() {
            write!(out, ",u1_p{k},u2_p{k}")?;
        }
        writeln!(out)?;
        let mut sample = self.samples.iter().skip(1).peekable();
        for row in &self.audit {
            write!(
                out,
                "{},{},{},{},{},{}",
                sci(row.t),
                sci(row.kinetic),
                sci(row.potential),
                sci(row.dissipation),
                sci(row.work),
                sci(row.residual)
            )?;
            let s = sample.next_if(|s| (s.t.to_f64_lossy() - row.t).abs() <= 1e-9 * row.t.abs().max(1.0));
            for &(x, y) in probes {
                match s {
                    Some(s) => {
                        let p = disc.eval_at(&s.u, x, y, Side::of(y)).map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))?;
                        write!(out, ",{},{}", sci(p.u[0]), sci(p.u[1]))?;
                    }
                    None => write!(out, ",,")?,
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Integrates from `init` to `cfg.t_final` with energy bookkeeping.
pub fn integrate<T: Real>(evol: &Evolution<T>, init: EvolutionState<T>, profile: Option<&dyn Fn(T) -> T>) -> Result<Trajectory<T>> {
    evol.check(&init)?;
    let (k, p) = evol.energy(&init);
    let initial_energy = (k + p).to_f64_lossy();
    let steps = evol.cfg.steps();
    let mut audit = Vec::with_capacity(steps);
    let mut samples = vec![init.clone()];
    let mut cur = init;
    for n in 1..=steps {
        let next = evol.step(&cur, profile)?;
        audit.push(evol.audit_pair(&cur, &next, profile));
        cur = next;
        if n % evol.cfg.sample_every == 0 || n == steps {
            samples.push(cur.clone());
        }
    }
    Ok(Trajectory { samples, audit, initial_energy })
}

/// Builds the problem of `kind` on a uniform material and integrates it.
/// Thin-fault kinds use `eps`, sharp kinds ignore it.
pub fn run_evolution(
    kind: ProblemKind,
    n: usize,
    eps: f64,
    coeffs: &Coefficients<f64>,
    forcing: &Forcing<'_, f64>,
    init: &InitialData<'_, f64>,
    cfg: TimeConfig<f64>,
) -> Result<(Evolution<f64>, Trajectory<f64>)> {
    coeffs.validate()?;
    let geom = if kind.is_sharp() { FaultGeometry::sharp() } else { FaultGeometry::new(eps)? };
    if !kind.is_sharp() && geom.is_sharp() {
        return Err(Error::InvalidGeometry("thin-fault evolution needs eps > 0".into()));
    }
    let disc = Discretization::new(n, geom, kind.is_coupled())?;
    let mat = MaterialField::uniform(*coeffs, disc.mesh())?;
    let state = init_state(&disc, init)?;
    let evol = Evolution::new(kind, disc, &mat, &forcing.load, cfg)?;
    let traj = integrate(&evol, state, forcing.profile)?;
    Ok((evol, traj))
}
