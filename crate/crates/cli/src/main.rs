//! `vortexlab`: batch experiments on point-vortex dynamics.
//!
//! Exit status: 0 on success, 1 on invalid configuration or I/O failure.
//! `simulate` returns 2 on an ε-collapse and 3 on step-size underflow;
//! `kernel-check` returns 2 if any condition fails; `collapse-demo` returns 2
//! when no candidate is found.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "vortexlab", version = output::VERSION, about = "Point-vortex dynamics laboratory")]
struct Cli {
    /// Size of the worker pool for Monte Carlo scans.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a vortex system and export its trajectory.
    Simulate(RunArgs),
    /// Print the conserved quantities and cluster diagnostics of a system.
    Invariants(RunArgs),
    /// Estimate ε-collapse fractions over a list of cutoffs.
    CollapseScan(SeededArgs),
    /// Verify the regularization conditions on dense grids.
    KernelCheck(RunArgs),
    /// Search for a C = 0 triangle and integrate it into collapse.
    CollapseDemo(SeededArgs),
}

#[derive(Args)]
pub struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,

    /// Output directory, or the path of the result `.json`.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    /// Also write two-column data files for plotting.
    #[arg(long)]
    pub emit_gnuplot: bool,
}

#[derive(Args)]
pub struct SeededArgs {
    #[command(flatten)]
    pub run: RunArgs,

    /// Overrides the configured `rng_seed`.
    #[arg(long, env = "VORTEXLAB_SEED")]
    pub seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match &cli.command {
        Command::Simulate(args) => commands::simulate(args),
        Command::Invariants(args) => commands::invariants(args),
        Command::CollapseScan(args) => commands::collapse_scan(args, cli.threads),
        Command::KernelCheck(args) => commands::kernel_check(args),
        Command::CollapseDemo(args) => commands::collapse_demo(args),
    };
    match status {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
