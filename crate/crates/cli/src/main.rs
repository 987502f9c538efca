use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use mmac_cli::output::Units;
use mmac_cli::{commands, Outcome, RunConfig, RunOptions};

#[derive(Parser)]
#[command(
    name = "mmac",
    version,
    about = "Rate regions, error exponents and decoder simulation for mismatched multiple-access channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace achievable rate region boundaries.
    Region(Args),
    /// Evaluate error exponents over a rate grid.
    Exponent(Args),
    /// Estimate decoder error probabilities at finite blocklength.
    Simulate(Args),
    /// Compare the solver against the type-grid oracle and check invariants.
    Validate(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report rates and exponents in bits instead of nats.
    #[arg(long)]
    bits: bool,
    /// Overrides the solver's optimality tolerance.
    #[arg(long, hide = true)]
    solver_opt_tol: Option<f64>,
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("MMAC_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("MMAC_THREADS must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome> {
    configure_threads()?;
    let (run, args): (fn(&RunOptions) -> Result<Outcome>, Args) = match cli.command {
        Command::Region(a) => (commands::region, a),
        Command::Exponent(a) => (commands::exponent, a),
        Command::Simulate(a) => (commands::simulate, a),
        Command::Validate(a) => (commands::validate, a),
    };
    let mut opts = RunOptions::new(RunConfig::load(&args.config)?);
    if let Some(out) = args.out {
        opts.out = Some(out);
    }
    if let Some(seed) = args.seed {
        opts.seed = seed;
    }
    opts.units = Units { bits: args.bits };
    if let Some(t) = args.solver_opt_tol {
        if !(t > 0.0) {
            bail!("solver tolerance must be positive");
        }
        opts.solver.opt_tol = t;
    }
    run(&opts)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
