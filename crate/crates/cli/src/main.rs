use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;
mod select;

#[derive(Parser)]
#[command(name = "qtm", version, about = "Steady-state currents and regimes of two TLS ensembles between a hot and a cold bath")]
struct Cli {
    /// Worker threads for grid points and collision runs.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Comma list of tags (com1, com2, cas1, cas2, ind1, ind2) or `all`.
    /// Defaults to the mode and interaction in the config.
    #[arg(long)]
    scenarios: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Steady state, currents, coherence and regime at one frequency ratio.
    Steady {
        #[command(flatten)]
        common: Common,
        /// Override the hot frequency as a multiple of the cold one.
        #[arg(long)]
        ratio: Option<f64>,
    },
    /// Sweep the hot frequency and write one CSV per scenario.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// `lo:hi:step` in units of the cold frequency.
        #[arg(long)]
        grid: Option<String>,
        /// Also write x-y data files and an SVG of the power-efficiency curves.
        #[arg(long)]
        plots: bool,
    },
    /// Collision-model currents at several collision times against the master equation.
    CollisionCheck {
        #[command(flatten)]
        common: Common,
        /// Comma list of collision times, at least three.
        #[arg(long)]
        tau: Option<String>,
    },
    /// Parse a config and print it in canonical form.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug)]
pub enum CliError {
    /// Bad input: exit 2.
    Invalid(String),
    /// Steady state not unique: exit 3.
    Degenerate(String),
    Failed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Degenerate(_) => 3,
            CliError::Failed(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Invalid(m) | CliError::Degenerate(m) | CliError::Failed(m) => m,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

impl From<qtm_core::Error> for CliError {
    fn from(e: qtm_core::Error) -> Self {
        match e {
            qtm_core::Error::Config(_) | qtm_core::Error::InvalidArgument(_) => CliError::Invalid(e.to_string()),
            other => CliError::Failed(other.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Invalid("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Failed(e.to_string()))?;
    }
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Steady { common, ratio } => commands::steady(&common.config, common.scenarios.as_deref(), ratio, &mut stdout),
        Command::Sweep { common, out, grid, plots } => {
            commands::sweep(&common.config, common.scenarios.as_deref(), grid.as_deref(), &out, plots, &mut stdout)
        }
        Command::CollisionCheck { common, tau } => {
            commands::collision_check(&common.config, common.scenarios.as_deref(), tau.as_deref(), &mut stdout)
        }
        Command::Validate { config } => commands::validate(&config, &mut stdout),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
