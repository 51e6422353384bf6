mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Equilibria of finite-blocklength covert communication games.
///
/// Exit status: 0 on success, 2 for invalid input, 3 when the solver or a
/// numerical routine fails.
#[derive(Debug, Parser)]
#[command(name = "covgame", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file (`key = value` lines). Without it a built-in preset is used.
    #[arg(long, value_name = "PATH", conflicts_with = "jammer")]
    pub scenario: Option<PathBuf>,
    /// Start from the jammer preset (0.05 mW power and jamming steps).
    #[arg(long)]
    pub jammer: bool,
    /// With --jammer, use 0.01 mW power and jamming steps.
    #[arg(long, requires = "jammer")]
    pub full_grid: bool,
    /// Override one scenario key, e.g. `--set beta=1.5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineMode {
    /// Uniform over the 2nd through k-th grid powers.
    Uniform,
    /// One constant grid power.
    Constant,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the game and write both equilibrium strategies.
    Solve {
        #[command(flatten)]
        common: Common,
    },
    /// Solve over a list of tradeoff weights and write the tradeoff curve.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma separated weights; empty or absent selects 25 log-spaced
        /// values in [0.1, 20].
        #[arg(long, value_name = "LIST")]
        betas: Option<String>,
    },
    /// Evaluate heuristic transmitters against the best warden threshold.
    Baseline {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: BaselineMode,
        /// `FIRST:LAST`, inclusive: k values for uniform mode, powers in mW
        /// for constant mode. Defaults to the whole power grid.
        #[arg(long, value_name = "FIRST:LAST")]
        range: Option<String>,
    },
    /// Estimate detection errors by simulation and compare with the analytic
    /// values.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Transmitter strategy CSV as written by `solve`. Without strategy
        /// files the equilibrium is computed first.
        #[arg(long, value_name = "PATH", requires = "col_strategy")]
        row_strategy: Option<PathBuf>,
        /// Warden strategy CSV as written by `solve`.
        #[arg(long, value_name = "PATH", requires = "row_strategy")]
        col_strategy: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        blocks: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve { common } => commands::solve(&common),
        Command::Sweep { common, betas } => commands::sweep(&common, betas.as_deref()),
        Command::Baseline { common, mode, range } => commands::baseline(&common, mode, range.as_deref()),
        Command::Simulate { common, row_strategy, col_strategy, blocks, seed } => {
            let files = row_strategy.zip(col_strategy);
            commands::simulate(&common, files, blocks, seed)
        }
    };
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("covgame: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
