//! `stit`: simulate STIT tessellations and run the mixing and ergodicity
//! experiments from the command line.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "stit", version, about = "STIT tessellations: simulation, functionals, mixing and ergodic experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file; every field has a default.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed, overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Replicate count, overrides every section of the config.
    #[arg(long, global = true)]
    replicates: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Exit with status 2 when the command's checks fail.
    #[arg(long = "assert", global = true)]
    assert_checks: bool,
    /// Worker threads for replicate loops (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Simulate and write the tessellation (and an SVG in the plane).
    Simulate,
    /// Evaluate functionals on [-n,n[^l and its unit cubes.
    Functionals,
    /// Variance of the normalised functional across growing windows.
    VarianceScan,
    /// Normalised trajectories of a subadditive functional.
    ErgodicScan,
    /// Empirical beta-mixing lower bounds and decay fit.
    Beta,
    /// Check that the hyperplane measure meets the standing assumptions.
    CheckAssumptions,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Functionals => "functionals",
            Command::VarianceScan => "variance-scan",
            Command::ErgodicScan => "ergodic-scan",
            Command::Beta => "beta",
            Command::CheckAssumptions => "check-assumptions",
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("--threads")?;
    }
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(r) = cli.replicates {
        cfg.replicates = Some(r);
        cfg.simulate.replicates = None;
        cfg.functionals.replicates = None;
        cfg.variance_scan.replicates = None;
        cfg.ergodic_scan.replicates = None;
        cfg.beta.replicates = None;
    }
    let out = output::OutDir::create(&cli.out_dir)?;
    let ctx = commands::Context { cfg: &cfg, out: &out, command: cli.command.name() };
    match cli.command {
        Command::Simulate => commands::simulate(&ctx),
        Command::Functionals => commands::functionals(&ctx),
        Command::VarianceScan => commands::variance_scan(&ctx),
        Command::ErgodicScan => commands::ergodic_scan(&ctx),
        Command::Beta => commands::beta(&ctx),
        Command::CheckAssumptions => commands::check_assumptions(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            if cli.assert_checks {
                eprintln!("checks failed");
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
