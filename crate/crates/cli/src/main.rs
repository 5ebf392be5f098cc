use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use multipolar_cli::config::RunConfig;
use multipolar_cli::{commands, CliError, EXIT_INPUT, EXIT_NUMERICS, EXIT_OK};

#[derive(Parser)]
#[command(
    name = "multipolar",
    version,
    about = "Minimizers and studies for multipolar Hardy-Sobolev quotients"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the positivity, existence and non-attainability conditions.
    Check(Common),
    /// Minimize the discrete quotient and report the level and exponents.
    Minimize(Common),
    /// Run the study named by the `study` key.
    Study(Common),
    /// Tabulate polygon ring potentials beside their circle limit.
    PotentialTable(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Random seed; overrides the `seed` key.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (name, common) = match &cli.command {
        Command::Check(c) => ("check", c),
        Command::Minimize(c) => ("minimize", c),
        Command::Study(c) => ("study", c),
        Command::PotentialTable(c) => ("potential-table", c),
    };
    if let Some(t) = common.threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let text =
        fs::read_to_string(&common.config).map_err(|e| CliError::Io(format!("{}: {e}", common.config.display())))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let out = &common.out;
    match name {
        "check" => commands::check(&cfg, out),
        "minimize" => commands::minimize(&cfg, out),
        "study" => commands::study(&cfg, out, cfg.seed),
        _ => commands::potential_table(&cfg, out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::from(EXIT_OK),
        Ok(false) => {
            eprintln!("error: numerics did not converge; outputs were written");
            ExitCode::from(EXIT_NUMERICS)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            debug_assert!(code == EXIT_INPUT || code == EXIT_NUMERICS);
            ExitCode::from(code)
        }
    }
}
