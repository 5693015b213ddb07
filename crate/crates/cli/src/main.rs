//! `largesol` command-line interface.

/// `println!` that ignores a closed standard output.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

mod cheeger_cmd;
mod config;
mod error;
mod example51_cmd;
mod ladder_cmd;
mod setup;
mod simulate;
mod svg;
mod verify_cmd;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "largesol",
    version,
    about = "Large solutions of the fast-diffusion p-Laplacian and total variation flows"
)]
struct Cli {
    /// Worker threads for ladder levels and rasters (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// `key = value` file supplying defaults for missing flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<std::path::PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One Dirichlet run of the p-Laplacian (p > 1) or TV (p = 1) flow.
    Simulate(simulate::SimulateArgs),
    /// Boundary-lift ladder n0, 2n0, 4n0, ... with classification.
    Ladder(ladder_cmd::LadderArgs),
    /// Closed-form TV large solution on the unit disk.
    Example51(example51_cmd::Example51Args),
    /// Cheeger radius, constant and calibrability of a convex shape.
    Cheeger(cheeger_cmd::CheegerArgs),
    /// Property checks on stored trajectories or ladders.
    Verify(verify_cmd::VerifyArgs),
    /// Ladder for p >= 2 that must diverge.
    Nonexistence(ladder_cmd::NonexistenceArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure worker pool: {e}")))?;
    }
    match cli.command {
        Command::Simulate(a) => simulate::run(&a),
        Command::Ladder(a) => ladder_cmd::run(&a),
        Command::Example51(a) => example51_cmd::run(&a),
        Command::Cheeger(a) => cheeger_cmd::run(&a),
        Command::Verify(a) => verify_cmd::run(&a),
        Command::Nonexistence(a) => ladder_cmd::run_nonexistence(&a),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match config::merge(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is_broken_pipe() => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
