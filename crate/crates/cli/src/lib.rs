//! Command-line front end: config parsing and the subcommands.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad invocation or configuration; nothing was computed.
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Failure(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "kpp-fronts",
    version,
    about = "Wave speeds and front simulations for bistable reaction with p-Laplacian-type diffusion"
)]
pub struct Cli {
    /// TOML run configuration; every section is optional.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads for the parallel parts.
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub svg: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Check the reaction and diffusion laws.
    Validate,
    /// Critical speed, phase-plane trajectory and wave profile.
    Wave,
    /// Simulate the front and fit its speed.
    Simulate,
    /// Front speed and interface width over `sweep.epsilons`.
    Sweep,
    /// Critical speeds of the regularized laws over `regularization.alphas`.
    RegularizationStudy,
    /// Print the effective configuration as TOML.
    Config,
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let out = cli.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    let dispatch = || match cli.command {
        Command::Validate => commands::validate(&cfg),
        Command::Wave => commands::wave(&cfg, &out, cli.svg),
        Command::Simulate => commands::simulate(&cfg, &out, cli.svg),
        Command::Sweep => commands::sweep(&cfg, &out, cli.svg),
        Command::RegularizationStudy => commands::regularization_study(&cfg, &out, cli.svg),
        Command::Config => {
            print!("{}", cfg.to_toml());
            Ok(())
        }
    };
    match cli.workers {
        None => dispatch(),
        Some(0) => Err(CliError::Usage("--workers must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Failure(format!("thread pool: {e}")))?
            .install(dispatch),
    }
}
