//! `skyline`: tabulates the visibility model and runs its Monte-Carlo checks.

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Output;
use crate::config::{Flags, RunConfig};
use crate::error::{CliError, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "skyline", version, about = "Sky visibility statistics for a stochastic city skyline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// cdf/pdf of the blockage angle θ and visibility angle ψ per variant.
    Angles,
    /// Mean angles over a density grid.
    Means,
    /// Marginal laws of the blocking building.
    Joint,
    /// Surface-side angle laws, their means and the angular gains.
    Ris,
    /// Connectivity curves and the case-study table.
    Coverage,
    /// LOS probability against elevation angle.
    Threegpp,
    /// Monte-Carlo validation suite.
    Validate,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&cli.flags)?;
    let out = match cli.command {
        Command::Angles => commands::cmd_angles(&cfg)?,
        Command::Means => commands::cmd_means(&cfg)?,
        Command::Joint => commands::cmd_joint(&cfg)?,
        Command::Ris => commands::cmd_ris(&cfg)?,
        Command::Coverage => commands::cmd_coverage(&cfg)?,
        Command::Threegpp => commands::cmd_threegpp(&cfg)?,
        Command::Validate => commands::cmd_validate(&cfg)?,
    };
    match out {
        Output::Tables(tables) => output::write_tables(&tables, cfg.format, cfg.out.as_deref()),
        Output::Reports(reports) => {
            output::write_reports(&reports, cfg.format, cfg.out.as_deref())?;
            let failed = reports.iter().filter(|r| !r.pass).count();
            if cfg.strict && failed > 0 {
                return Err(CliError::ValidationFailed {
                    failed,
                    total: reports.len(),
                });
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("skyline: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
