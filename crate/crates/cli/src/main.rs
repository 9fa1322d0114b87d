//! `doublephase` command-line driver.
//!
//! Exit codes: 0 success, 2 configuration or validation error, 3 numerical
//! failure (or a failed experiment check), 4 non-convergence under
//! `--strict`.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Outcome;
use config::RunConfig;
use doublephase::error::Result;

#[derive(Parser)]
#[command(name = "doublephase", version, about = "Double-phase norms, eigenpairs and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Exit with code 4 when the solver does not converge.
    #[arg(long, global = true)]
    strict: bool,
    /// Cells per side of the mesh.
    #[arg(long, global = true)]
    resolution: Option<usize>,
    /// Override a config key, e.g. --set solver.tol_lambda=1e-8.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Luxemburg norm, closed form, modular and rescaled norm of a field.
    Norm,
    /// First eigenpair.
    Eig,
    /// Minimax upper bounds for m = 1..m_max.
    Eigm,
    /// One of: stability, domains, faberkrahn, largeexp, weyl, symmetry.
    Experiment { name: String },
}

fn config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for pair in &cli.set {
        cfg.set_pair(pair)?;
    }
    if let Some(seed) = cli.seed {
        cfg.set("seed", &seed.to_string())?;
    }
    if let Some(out) = &cli.out {
        cfg.set("out", &out.to_string_lossy())?;
    }
    if let Some(n) = cli.resolution {
        cfg.set("mesh.resolution", &n.to_string())?;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = config(cli)?;
    let strict = cli.strict || cfg.bool("strict")?;
    match &cli.command {
        Command::Norm => commands::cmd_norm(&cfg),
        Command::Eig => commands::cmd_eig(&cfg, strict),
        Command::Eigm => commands::cmd_eigm(&cfg),
        Command::Experiment { name } => commands::cmd_experiment(name, &cfg, strict),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).unwrap_or_else(Outcome::Failed);
    match &outcome {
        Outcome::Failed(e) => eprintln!("error: {e}"),
        Outcome::NotConverged => eprintln!("error: solver did not converge (--strict)"),
        Outcome::ChecksFailed => eprintln!("error: at least one check failed"),
        Outcome::Ok => {}
    }
    ExitCode::from(outcome.code())
}
