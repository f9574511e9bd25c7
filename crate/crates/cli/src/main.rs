use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use faultline_cli::audits::AUDIT_HEADER;
use faultline_cli::{converge, evolve, run_suite, solve, write_audit, CliError, Overrides, RunConfig, Suite};

#[derive(Parser)]
#[command(name = "faultline", version, about = "Thin-fault elasticity experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Error table over a sequence of refinements.
    Converge(#[command(flatten)] Overrides),
    /// Nodal values and interface traces of one solve.
    Solve {
        #[command(flatten)]
        flags: Overrides,
        /// Interface table; defaults to `<out>.interface.csv`, or follows
        /// the grid on standard output.
        #[arg(long)]
        interface_out: Option<PathBuf>,
    },
    /// Free vibration with an energy audit.
    Evolve(#[command(flatten)] Overrides),
    /// Run a verification suite; fails when any row fails.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[command(flatten)]
        flags: Overrides,
    },
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Converge(flags) => {
            let cfg = RunConfig::load(flags)?;
            converge(&cfg, sink(cfg.out.as_deref())?)?;
        }
        Command::Solve { flags, interface_out } => {
            let cfg = RunConfig::load(flags)?;
            match (&cfg.out, interface_out) {
                (None, None) => {
                    let (mut grid, mut iface) = (Vec::new(), Vec::new());
                    solve(&cfg, &mut grid, &mut iface)?;
                    let mut out = io::stdout().lock();
                    out.write_all(&grid)?;
                    out.write_all(b"\n")?;
                    out.write_all(&iface)?;
                }
                (out, iface) => {
                    let iface = iface.or_else(|| out.as_ref().map(|p| p.with_extension("interface.csv")));
                    solve(&cfg, sink(out.as_deref())?, sink(iface.as_deref())?)?;
                }
            }
        }
        Command::Evolve(flags) => {
            let cfg = RunConfig::load(flags)?;
            evolve(&cfg, sink(cfg.out.as_deref())?)?;
        }
        Command::Verify { suite, flags } => {
            let cfg = RunConfig::load(flags)?;
            let rows = run_suite(suite, &cfg)?;
            write_audit(&rows, sink(cfg.out.as_deref())?)?;
            let failed: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
            if !failed.is_empty() {
                eprintln!("{} of {} rows failed:", failed.len(), rows.len());
                eprintln!("{AUDIT_HEADER}");
                for r in failed {
                    eprintln!("{}", r.to_csv());
                }
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("faultline: {e}");
            ExitCode::from(2)
        }
    }
}
