//! `nlgreen`: kernels, forced solves, error tables and parameter sweeps
//! from a TOML experiment config.

mod commands;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use nlgreen::config::ExperimentConfig;

use commands::Run;
use report::OutputDir;

#[derive(Debug, Parser)]
#[command(name = "nlgreen", version, about = "Nonlinear Green's function experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (TOML). Defaults apply to omitted keys.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Deterministic pipeline (the only mode; accepted for scripts).
    #[arg(long, global = true, default_value_t = true)]
    seedless: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the kernel, write its samples and measured distributional strengths.
    Green,
    /// Reference solve, expansion fits and error curves.
    Solve,
    /// Max/min Er1 per expansion order (KdV, f = exp by default).
    Table1,
    /// Repeat `solve` over `sweep.values` of `sweep.parameter`.
    Sweep,
}

fn load(cli: &Cli) -> Result<ExperimentConfig> {
    Ok(match (&cli.config, &cli.command) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Command::Table1) => commands::table1_default_config(),
        (None, _) => ExperimentConfig::default(),
    })
}

fn execute(cli: &Cli) -> Result<()> {
    let config = load(cli)?;
    let base_dir = cli.config.as_deref().and_then(Path::parent).unwrap_or(Path::new("."));
    let out_dir = cli
        .out
        .clone()
        .or_else(|| config.output.dir.as_ref().map(|d| base_dir.join(d)))
        .unwrap_or_else(|| PathBuf::from("out"));
    let run = Run { out: OutputDir::create(&out_dir)?, config, base_dir, seedless: cli.seedless };
    match cli.command {
        Command::Green => commands::green(&run),
        Command::Solve => commands::solve(&run),
        Command::Table1 => commands::table1(&run),
        Command::Sweep => commands::sweep(&run),
    }?;
    println!("wrote {}", out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
