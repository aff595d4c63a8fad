use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wrmm_cli::{commands, prepare, CliError, Outcome, Overrides, RunConfig};

/// Wasserstein-robust market making: solve, select radii, simulate and
/// validate against brute-force oracles.
#[derive(Parser)]
#[command(name = "wrmm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the worst-case moment problem and write the Gibbs policy.
    Solve(RunArgs),
    /// Select the ambiguity radius by bootstrap.
    Radius(RunArgs),
    /// Evaluate robust policies under a shifted market.
    Simulate(RunArgs),
    /// Compare analytic bounds with oracle searches.
    Validate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

type Handler = fn(&RunConfig) -> Result<Outcome, CliError>;

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let (args, f): (_, Handler) = match cli.command {
        Command::Solve(a) => (a, commands::solve),
        Command::Radius(a) => (a, commands::radius),
        Command::Simulate(a) => (a, commands::simulate),
        Command::Validate(a) => (a, commands::validate),
    };
    let overrides = Overrides {
        out: args.out,
        seed: args.seed,
    };
    let cfg = prepare(&args.config, &overrides)?;
    f(&cfg)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => {
            println!("{}", outcome.report.trim_end());
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
