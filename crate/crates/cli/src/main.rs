//! `hflow`: evaluate the Hawking mass and its variation on a surface, run
//! uniformly area expanding flows, and run the verification battery.

mod commands;
mod config;
mod schema;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
    #[error("geometry error: {0}")]
    Geometry(#[from] hflow_core::Error),
}

impl CliError {
    pub fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Geometry(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hflow",
    version,
    about = "Hawking mass evaluation and area expanding flows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mass, variation formulas and certificate of one surface.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Flow a surface and record the trajectory.
    Flow {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the property battery and write verify.json.
    Verify {
        /// Built-in default configuration when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated check names.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("HFLOW_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::Config(format!(
                "HFLOW_THREADS must be a positive integer, got {value:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn out_dir(flag: Option<PathBuf>, config: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = flag
        .or_else(|| config.out.clone())
        .ok_or_else(|| CliError::Config("no output directory: pass --out or set \"out\"".into()))?;
    std::fs::create_dir_all(&dir).map_err(CliError::io(format!("creating {}", dir.display())))?;
    Ok(dir)
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Evaluate { config, out } => {
            let config = RunConfig::load(&config)?;
            let dir = out_dir(out, &config)?;
            commands::evaluate(&config, &dir)?;
            Ok(0)
        }
        Command::Flow { config, out } => {
            let config = RunConfig::load(&config)?;
            let dir = out_dir(out, &config)?;
            commands::flow(&config, &dir)
        }
        Command::Verify { config, out, only } => {
            let config = match config {
                Some(path) => RunConfig::load(&path)?,
                None => config::default_verify_config(),
            };
            let dir = match out.or_else(|| config.out.clone()) {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)
                        .map_err(CliError::io(format!("creating {}", dir.display())))?;
                    dir
                }
                None => PathBuf::from("."),
            };
            let all_pass = verify::run(&config, &only, &dir)?;
            Ok(if all_pass { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("hflow: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
