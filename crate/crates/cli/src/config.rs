//! Run configuration: defaults, an optional `key = value` file, and command
//! line overrides, in increasing priority.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use faultline::Coefficients;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    LimitUncoupled,
    LimitCoupled,
    EpsUncoupled,
    EpsCoupled,
    /// Edge dislocation with the coupled limit model.
    Dislocation,
}

impl Problem {
    pub fn is_sharp(self) -> bool {
        !matches!(self, Self::EpsUncoupled | Self::EpsCoupled)
    }

    pub fn is_coupled(self) -> bool {
        matches!(self, Self::LimitCoupled | Self::EpsCoupled | Self::Dislocation)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::LimitUncoupled => "limit-uncoupled",
            Self::LimitCoupled => "limit-coupled",
            Self::EpsUncoupled => "eps-uncoupled",
            Self::EpsCoupled => "eps-coupled",
            Self::Dislocation => "dislocation",
        }
    }
}

/// Settings shared by every subcommand. Unset fields fall back to the
/// config file, then to the defaults of [`RunConfig`].
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Plain-text `key = value` file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub problem: Option<Problem>,
    /// Coarsest refinement index (mesh size 1/n).
    #[arg(long)]
    pub nmin: Option<usize>,
    /// Finest refinement index; `nmax / nmin` must be a power of two.
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Refinement index of a single solve or evolution.
    #[arg(long)]
    pub n: Option<usize>,
    /// Fault width.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub tfinal: Option<f64>,
    /// Relative residual tolerance of the linear solver.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub eta_hat: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    /// Rayleigh damping proportional to the mass (evolutions).
    #[arg(long)]
    pub damping_mass: Option<f64>,
    /// Rayleigh damping proportional to the stiffness (evolutions).
    #[arg(long)]
    pub damping_stiffness: Option<f64>,
    /// Mollify the lifted field in the energy audit.
    #[arg(long)]
    pub mollify: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: Problem,
    pub nmin: usize,
    pub nmax: usize,
    pub n: usize,
    pub eps: f64,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub dt: f64,
    pub tfinal: f64,
    pub tol: f64,
    pub coeffs: Coefficients,
    pub damping_mass: f64,
    pub damping_stiffness: f64,
    pub mollify: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: Problem::LimitUncoupled,
            nmin: 8,
            nmax: 64,
            n: 16,
            eps: 0.1,
            out: None,
            seed: 7,
            dt: 0.05,
            tfinal: 1.0,
            tol: 1e-12,
            coeffs: Coefficients::reference(),
            damping_mass: 0.0,
            damping_stiffness: 0.0,
            mollify: false,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| CliError::Config(format!("invalid value {value:?} for {key}")))
}

impl Overrides {
    /// Parses `key = value` lines; `#` starts a comment, keys may use `-` or `_`.
    pub fn from_file_text(text: &str) -> Result<Self, CliError> {
        let mut o = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| CliError::Config(format!("line {}: expected key = value, got {raw:?}", lineno + 1)))?;
            let (key, value) = (key.trim().replace('-', "_"), value.trim());
            match key.as_str() {
                "problem" => o.problem = Some(Problem::from_str(value, true).map_err(|_| CliError::Config(format!("unknown problem {value:?}")))?),
                "nmin" => o.nmin = Some(parse(&key, value)?),
                "nmax" => o.nmax = Some(parse(&key, value)?),
                "n" => o.n = Some(parse(&key, value)?),
                "eps" => o.eps = Some(parse(&key, value)?),
                "out" => o.out = Some(PathBuf::from(value)),
                "seed" => o.seed = Some(parse(&key, value)?),
                "dt" => o.dt = Some(parse(&key, value)?),
                "tfinal" => o.tfinal = Some(parse(&key, value)?),
                "tol" => o.tol = Some(parse(&key, value)?),
                "mu" => o.mu = Some(parse(&key, value)?),
                "lambda" => o.lambda = Some(parse(&key, value)?),
                "rho" => o.rho = Some(parse(&key, value)?),
                "beta" => o.beta = Some(parse(&key, value)?),
                "eta_hat" => o.eta_hat = Some(parse(&key, value)?),
                "nu" => o.nu = Some(parse(&key, value)?),
                "damping_mass" => o.damping_mass = Some(parse(&key, value)?),
                "damping_stiffness" => o.damping_stiffness = Some(parse(&key, value)?),
                "mollify" => o.mollify = Some(parse(&key, value)?),
                _ => return Err(CliError::Config(format!("line {}: unknown key {key:?}", lineno + 1))),
            }
        }
        Ok(o)
    }

    /// Fields of `self`, falling back to `base` where unset.
    pub fn or(self, base: Overrides) -> Overrides {
        Overrides {
            config: self.config.or(base.config),
            problem: self.problem.or(base.problem),
            nmin: self.nmin.or(base.nmin),
            nmax: self.nmax.or(base.nmax),
            n: self.n.or(base.n),
            eps: self.eps.or(base.eps),
            out: self.out.or(base.out),
            seed: self.seed.or(base.seed),
            dt: self.dt.or(base.dt),
            tfinal: self.tfinal.or(base.tfinal),
            tol: self.tol.or(base.tol),
            mu: self.mu.or(base.mu),
            lambda: self.lambda.or(base.lambda),
            rho: self.rho.or(base.rho),
            beta: self.beta.or(base.beta),
            eta_hat: self.eta_hat.or(base.eta_hat),
            nu: self.nu.or(base.nu),
            damping_mass: self.damping_mass.or(base.damping_mass),
            damping_stiffness: self.damping_stiffness.or(base.damping_stiffness),
            mollify: self.mollify.or(base.mollify),
        }
    }
}

impl RunConfig {
    /// Flags over the config file named by `flags.config` over defaults.
    pub fn load(flags: Overrides) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                Overrides::from_file_text(&text)?
            }
            None => Overrides::default(),
        };
        Self::resolve(flags.or(file))
    }

    pub fn resolve(o: Overrides) -> Result<Self, CliError> {
        let d = Self::default();
        let c = d.coeffs;
        let cfg = Self {
            problem: o.problem.unwrap_or(d.problem),
            nmin: o.nmin.unwrap_or(d.nmin),
            nmax: o.nmax.unwrap_or(d.nmax),
            n: o.n.unwrap_or(d.n),
            eps: o.eps.unwrap_or(d.eps),
            out: o.out,
            seed: o.seed.unwrap_or(d.seed),
            dt: o.dt.unwrap_or(d.dt),
            tfinal: o.tfinal.unwrap_or(d.tfinal),
            tol: o.tol.unwrap_or(d.tol),
            coeffs: Coefficients {
                mu: o.mu.unwrap_or(c.mu),
                lambda: o.lambda.unwrap_or(c.lambda),
                rho: o.rho.unwrap_or(c.rho),
                beta: o.beta.unwrap_or(c.beta),
                eta_hat: o.eta_hat.unwrap_or(c.eta_hat),
                nu: o.nu.unwrap_or(c.nu),
            },
            damping_mass: o.damping_mass.unwrap_or(d.damping_mass),
            damping_stiffness: o.damping_stiffness.unwrap_or(d.damping_stiffness),
            mollify: o.mollify.unwrap_or(d.mollify),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        for (name, n) in [("nmin", self.nmin), ("nmax", self.nmax), ("n", self.n)] {
            if n < 2 || n % 2 != 0 {
                return bad(format!("{name} must be even and at least 2, got {n}"));
            }
        }
        if self.nmax < self.nmin || !(self.nmax / self.nmin).is_power_of_two() || !self.nmax.is_multiple_of(self.nmin) {
            return bad(format!("nmax / nmin must be a power of two, got {} / {}", self.nmax, self.nmin));
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return bad(format!("eps must lie in (0, 1/2), got {}", self.eps));
        }
        if !(self.dt > 0.0 && self.tfinal > 0.0 && self.dt.is_finite() && self.tfinal.is_finite()) {
            return bad(format!("dt and tfinal must be positive, got {} and {}", self.dt, self.tfinal));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad(format!("tol must lie in (0, 1), got {}", self.tol));
        }
        if !(self.damping_mass >= 0.0 && self.damping_stiffness >= 0.0) {
            return bad("damping must be nonnegative".into());
        }
        self.coeffs.validate()?;
        Ok(())
    }

    /// `nmin, 2 nmin, ..., nmax`.
    pub fn levels(&self) -> Vec<usize> {
        std::iter::successors(Some(self.nmin), |&n| (n < self.nmax).then_some(2 * n)).collect()
    }
}
