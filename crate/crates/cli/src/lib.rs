//! Experiment drivers behind the `faultline` command: convergence tables,
//! field dumps, evolutions and verification suites, all written as CSV.

pub mod audits;
pub mod config;
pub mod experiments;

pub use audits::{run_suite, write_audit, AuditRow, Suite};
pub use config::{Overrides, Problem, RunConfig};
pub use experiments::{converge, evolve, solve};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] faultline::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
