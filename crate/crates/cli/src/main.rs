//! Command-line front end: entropy gradient flows, transport geodesics and
//! displacement-convexity certificates on the probability simplex.
//!
//! Exit codes: 0 success; 1 configuration/IO/domain error; 2 a certificate,
//! estimate, or property check came back negative (for `counterexample`,
//! code 2 means the expected witness was found); 3 geodesic solve failure.

mod commands;
mod config;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "entroflow",
    about = "Semidiscrete entropy gradient flows, transport geodesics, and displacement-convexity certificates",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON configuration file (see docs/ for one example per subcommand)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for reports and CSV files
    #[arg(long, default_value = ".", global = true)]
    out: PathBuf,

    /// Seed for all randomized sampling
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,

    /// Worker threads for parameter sweeps
    #[arg(long, default_value_t = 1, global = true)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the gradient flow and monitor the a priori estimates
    Simulate,
    /// Assemble the convexity matrices and certify positive semidefiniteness
    Convexity,
    /// Solve the two-point geodesic problem and verify displacement convexity
    Geodesic,
    /// Evaluate the explicit convexity constant of the quadratic-potential scheme
    Lambda,
    /// Reconstruct the indefinite quadratic-flux minor and search for a witness
    Counterexample,
    /// Run the mean-function identity and concavity suites
    VerifyMeans,
}

fn load_config<T: DeserializeOwned>(path: &Option<PathBuf>) -> Result<T> {
    let path = path
        .as_ref()
        .context("this subcommand needs --config PATH")?;
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    // report invalid fields with their path into the config
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de)
        .with_context(|| format!("parsing config {}", path.display()))
}

fn load_config_or_default<T: DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T> {
    match path {
        Some(_) => load_config(path),
        None => Ok(T::default()),
    }
}

fn run(cli: &Cli) -> Result<i32> {
    match cli.command {
        Command::Simulate => {
            let cfg = load_config(&cli.config)?;
            commands::simulate(&cfg, &cli.out, cli.seed)
        }
        Command::Convexity => {
            let cfg = load_config(&cli.config)?;
            commands::convexity_cmd(&cfg, &cli.out, cli.seed, cli.jobs)
        }
        Command::Geodesic => {
            let cfg = load_config(&cli.config)?;
            commands::geodesic(&cfg, &cli.out, cli.seed)
        }
        Command::Lambda => {
            let cfg = load_config(&cli.config)?;
            commands::lambda(&cfg, &cli.out, cli.seed)
        }
        Command::Counterexample => {
            let cfg = load_config_or_default(&cli.config)?;
            commands::counterexample_cmd(&cfg, &cli.out, cli.seed)
        }
        Command::VerifyMeans => {
            let cfg = load_config_or_default(&cli.config)?;
            commands::verify_means(&cfg, &cli.out, cli.seed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
