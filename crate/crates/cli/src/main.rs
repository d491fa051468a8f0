//! `sgrowth`: simulations, the local exploration algorithm, oracle
//! verification and Monte Carlo experiments from the command line.

mod args;
mod config;
mod experiments;
mod output;
mod run;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use args::{AutonomousArgs, PondsArgs, SimulateArgs, TailsArgs, VerifyArgs, XiArgs};

/// Exit codes.
pub const OK: u8 = 0;
pub const VERIFICATION_FAILED: u8 = 1;
pub const CONFIG_ERROR: u8 = 2;
pub const THRESHOLD: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "sgrowth",
    version,
    about = "Green cluster growth against red paralysis on lattices and graphs",
    after_help = "Exit codes: 0 success, 1 verification failure, 2 configuration error, \
                  3 step budget exhausted or censoring threshold exceeded."
)]
pub struct Cli {
    /// Key-value config file; `key = value` per line, keys named after
    /// long flags, plus `command = <subcommand>`. Flags given on the
    /// command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    #[allow(dead_code)] // read by config::expand_args before parsing
    pub config: Option<std::path::PathBuf>,

    /// Worker threads for replicate loops (default: all cores). Results do
    /// not depend on it.
    #[arg(long, global = true, value_name = "K")]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Event-driven simulation of the full dynamics on a finite graph.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
    /// Local exploration from one vertex, with condition check and step log.
    #[command(args_override_self = true)]
    Autonomous(AutonomousArgs),
    /// Oracle-equivalence suites on random instances.
    #[command(args_override_self = true)]
    Verify(VerifyArgs),
    /// Pond radius against critical connectivity.
    #[command(args_override_self = true)]
    Ponds(PondsArgs),
    /// Tails of the green cluster and of responsibility sets.
    #[command(args_override_self = true)]
    Tails(TailsArgs),
    /// Expected site-percolation cluster volume at the origin.
    #[command(args_override_self = true)]
    Xi(XiArgs),
}

fn main() -> ExitCode {
    let argv = match config::expand_args(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    let cli = Cli::try_parse_from(argv).unwrap_or_else(|e| e.exit());
    let code = match spatial_growth::analysis::with_jobs(cli.jobs, move || run::dispatch(cli.command)) {
        Ok(Ok(code)) => code,
        Ok(Err(e)) => run::report_error(&e),
        Err(e) => run::report_error(&e.into()),
    };
    ExitCode::from(code)
}
