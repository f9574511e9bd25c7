//! Convergence sweeps, single solves and evolutions.

use std::io::Write;

use faultline::evolution::{run_evolution, Damping, Forcing, InitialData, TimeConfig};
use faultline::manufactured::{error_norms, exact_norms, slip_norm, Dislocation, ExactSolution, Manufactured};
use faultline::report::{rate, sci};
use faultline::solvers::{
    solve_eps_stationary, solve_limit_coupled, solve_limit_uncoupled, LoadCase, ProblemKind, SolverOptions, StationarySolution,
};
use faultline::Side;

use crate::config::{Problem, RunConfig};
use crate::CliError;

/// Cells per half-width and Gauss points of the exact-norm quadrature.
const NORM_CELLS: usize = 32;
const NORM_POINTS: usize = 7;

/// Exact solution of a configured problem.
pub enum Exact {
    Manufactured(Manufactured<f64>),
    Dislocation(Dislocation<f64>),
}

impl Exact {
    pub fn of(cfg: &RunConfig) -> Result<Self, CliError> {
        Ok(match cfg.problem {
            Problem::Dislocation => Self::Dislocation(Dislocation::new(cfg.coeffs)?),
            _ => Self::Manufactured(Manufactured::new(cfg.coeffs)?),
        })
    }

    pub fn as_exact(&self) -> &dyn ExactSolution<f64> {
        match self {
            Self::Manufactured(m) => m,
            Self::Dislocation(d) => d,
        }
    }

    /// Slip prescribed to uncoupled problems.
    pub fn slip(&self, x: f64) -> f64 {
        match self {
            Self::Manufactured(m) => m.exact_gamma0(x),
            Self::Dislocation(d) => d.gamma(x).unwrap_or(f64::NAN),
        }
    }
}

/// Solves the configured problem at refinement index `n`.
pub fn solve_level(cfg: &RunConfig, exact: &Exact, n: usize) -> Result<StationarySolution<f64>, CliError> {
    let opts = SolverOptions::with_tol(cfg.tol);
    let sol = match exact {
        Exact::Manufactured(m) => {
            let u = |x, y, s| m.exact_u0(x, y, s);
            let f = |x, y, s| m.manufactured_f(x, y, s);
            let st = |x, y, s| m.stress_u0(x, y, s);
            let g = |x| m.exact_gamma0(x);
            let f0 = |x| m.manufactured_f0(x);
            let mut load = LoadCase { body_force: Some(&f), boundary: Some(&u), side_stress: Some(&st), ..LoadCase::default() };
            if cfg.problem.is_coupled() {
                load.slip_source = Some(&f0);
            } else {
                load.slip_data = Some(&g);
            }
            match cfg.problem {
                Problem::LimitUncoupled => solve_limit_uncoupled(n, &cfg.coeffs, &load, &opts)?,
                Problem::LimitCoupled => solve_limit_coupled(n, &cfg.coeffs, &load, &opts)?,
                p => solve_eps_stationary(n, cfg.eps, &cfg.coeffs, &load, p.is_coupled(), &opts)?,
            }
        }
        Exact::Dislocation(d) => {
            // boundary rows only, away from the singular node
            let u = |x, y, s| d.displacement(x, y, s);
            let st = |x, y, _: Side| d.dislocation_stress(x, y).unwrap_or([[f64::NAN; 2]; 2]);
            let f0 = |x| d.dislocation_f0(x).unwrap_or(f64::NAN);
            let load = LoadCase { slip_source: Some(&f0), boundary: Some(&u), side_stress: Some(&st), ..LoadCase::default() };
            solve_limit_coupled(n, &cfg.coeffs, &load, &opts)?
        }
    };
    Ok(sol)
}

fn rate_cell(prev: Option<f64>, cur: f64) -> String {
    prev.map(|p| sci(rate(p, cur))).unwrap_or_default()
}

/// Error table over `nmin, 2 nmin, ..., nmax`, one flushed row per level.
/// Rates are `log2` of consecutive error ratios; limit problems end with the
/// norms of the exact solution, and the dislocation table reports `|gamma_h|`
/// with its growth factor instead of errors in `H1` and the slip.
pub fn converge<W: Write>(cfg: &RunConfig, mut out: W) -> Result<(), CliError> {
    let exact = Exact::of(cfg)?;
    let dislocation = cfg.problem == Problem::Dislocation;
    let coupled = cfg.problem.is_coupled() && !dislocation;
    let header: &[&str] = if dislocation {
        &["h", "l2_u", "gamma_norm", "ndofs", "rate_l2_u", "growth_gamma_norm"]
    } else if coupled {
        &["h", "l2_u", "h1_u", "l2_gamma", "ndofs", "rate_l2_u", "rate_h1_u", "rate_l2_gamma"]
    } else {
        &["h", "l2_u", "h1_u", "ndofs", "rate_l2_u", "rate_h1_u"]
    };
    writeln!(out, "{}", header.join(","))?;
    out.flush()?;
    let mut prev: Option<(f64, f64, f64)> = None;
    for n in cfg.levels() {
        let sol = solve_level(cfg, &exact, n)?;
        let e = error_norms(&sol.disc, &sol.coeffs, exact.as_exact(), coupled)?;
        let row = if dislocation {
            let g = slip_norm(&sol.disc, &sol.coeffs)?;
            let growth = prev.map(|p| sci(g / p.2)).unwrap_or_default();
            let r = vec![sci(e.h), sci(e.l2_u), sci(g), e.ndofs.to_string(), rate_cell(prev.map(|p| p.0), e.l2_u), growth];
            prev = Some((e.l2_u, 0.0, g));
            r
        } else {
            let mut r = vec![sci(e.h), sci(e.l2_u), sci(e.h1_u)];
            let g = e.l2_gamma.unwrap_or(f64::NAN);
            if coupled {
                r.push(sci(g));
            }
            r.push(e.ndofs.to_string());
            r.push(rate_cell(prev.map(|p| p.0), e.l2_u));
            r.push(rate_cell(prev.map(|p| p.1), e.h1_u));
            if coupled {
                r.push(rate_cell(prev.map(|p| p.2), g));
            }
            prev = Some((e.l2_u, e.h1_u, g));
            r
        };
        writeln!(out, "{}", row.join(","))?;
        out.flush()?;
    }
    if cfg.problem.is_sharp() && !dislocation {
        let (l2, h1, g) = exact_norms(exact.as_exact(), NORM_CELLS, NORM_POINTS)?;
        let mut r = vec!["norms".to_string(), sci(l2), sci(h1)];
        if coupled {
            r.push(g.map(sci).unwrap_or_default());
        }
        r.resize(header.len(), String::new());
        writeln!(out, "{}", r.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Nodal values `x, y, u1, u2, side` to `grid`, and `x, jump, gamma` at the
/// interface node columns to `interface`. Thin faults report the jump across
/// the strip; uncoupled problems report the prescribed slip.
pub fn solve<W: Write, V: Write>(cfg: &RunConfig, grid: W, interface: V) -> Result<(), CliError> {
    let exact = Exact::of(cfg)?;
    let sol = solve_level(cfg, &exact, cfg.n)?;
    let slip = |x: f64| exact.slip(x);
    write_solution(&sol, if sol.kind.is_coupled() { None } else { Some(&slip) }, grid, interface)
}

pub fn write_solution<W: Write, V: Write>(
    sol: &StationarySolution<f64>,
    slip: Option<&dyn Fn(f64) -> f64>,
    mut grid: W,
    mut interface: V,
) -> Result<(), CliError> {
    let (disc, c) = (&sol.disc, &sol.coeffs);
    let (mesh, dofs) = (disc.mesh(), disc.dofs());
    writeln!(grid, "x,y,u1,u2,side")?;
    for (k, p) in mesh.nodes().iter().enumerate() {
        writeln!(grid, "{},{},{},{},{}", sci(p[0]), sci(p[1]), sci(c[dofs.u1(k)]), sci(c[dofs.u2(k)]), disc.node_side(k).tag())?;
    }
    grid.flush()?;
    writeln!(interface, "x,jump,gamma")?;
    let half = mesh.eps() / 2.0;
    for &x in mesh.node_columns() {
        let jump = if mesh.is_sharp() {
            disc.jump_at(c, x)?
        } else {
            disc.eval_at(c, x, half, Side::Plus)?.u[0] - disc.eval_at(c, x, -half, Side::Minus)?.u[0]
        };
        let gamma = match slip {
            Some(g) => g(x),
            None => disc.gamma_at(c, x)?.0,
        };
        writeln!(interface, "{},{},{}", sci(x), sci(jump), sci(gamma))?;
    }
    interface.flush()?;
    Ok(())
}

/// Initial pluck of the evolution driver: a bubble with a jump across the
/// interface and a cosine slip.
pub fn pluck(x: f64, y: f64, s: Side) -> [f64; 2] {
    let b = 1.0 - y * y;
    [b * (0.3 * x).cos() * (1.0 + 0.2 * s.sign::<f64>()), 0.4 * b * (0.5 * x).sin()]
}

pub fn pluck_slip(x: f64) -> f64 {
    0.2 * x.cos()
}

/// Probe points of the trajectory table.
pub const PROBES: [(f64, f64); 3] = [(-0.5, 0.5), (0.5, -0.5), (0.0, 0.25)];

/// Free vibration from [`pluck`] with energy audit, `t, kinetic, potential,
/// dissipation, work, residual` and probe displacements per step.
pub fn evolve<W: Write>(cfg: &RunConfig, out: W) -> Result<(), CliError> {
    let kind = match cfg.problem {
        Problem::LimitUncoupled => ProblemKind::LimitUncoupled,
        Problem::LimitCoupled => ProblemKind::LimitCoupled,
        Problem::EpsUncoupled => ProblemKind::EpsUncoupled,
        Problem::EpsCoupled => ProblemKind::EpsCoupled,
        Problem::Dislocation => return Err(CliError::Config("the dislocation has no evolution; pick one of the four models".into())),
    };
    let mut time = TimeConfig::new(cfg.dt, cfg.tfinal);
    time.tol = cfg.tol;
    time.damping = Damping { mass: cfg.damping_mass, stiffness: cfg.damping_stiffness };
    let slip = |x| pluck_slip(x);
    let mut forcing = Forcing::default();
    let mut init = InitialData { u: Some(&pluck), v: None, gamma: None };
    if kind.is_coupled() {
        init.gamma = Some(&slip);
    } else {
        forcing.load.slip_data = Some(&slip);
    }
    let (evol, traj) = run_evolution(kind, cfg.n, cfg.eps, &cfg.coeffs, &forcing, &init, time)?;
    traj.write_csv(evol.discretization(), &PROBES, out)?;
    Ok(())
}
