//! `kramers`: batch experiments on metastable 1D potentials.
//!
//! Exit codes: 0 success, 1 config or input error, 2 the potential violates
//! the modeling hypotheses, 3 numerical failure.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use crate::commands::Context;
use crate::config::Loaded;
use crate::error::{CliError, CliResult};
use crate::output::Sink;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Critical points, hypothesis checks and wells.
    Analyze,
    /// Low-lying eigenvalues and rescaled ratios per `h`.
    Spectrum,
    /// Reduced matrices `A₀`, `L₀` and their eigen-data.
    Reduce,
    /// Full versus reduced dynamics per `h`.
    Evolve,
    /// Convergence study of the dynamics over `h`.
    Sweep,
    /// Weighted graph Laplacian from the `graph` block.
    Graph,
}

#[derive(Debug, Parser)]
#[command(name = "kramers", version, about = "Metastability experiments for 1D multi-well potentials")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for per-`h` jobs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn run(args: &Args) -> CliResult<()> {
    let loaded = Loaded::read(&args.config)?;
    let dir = args.out.clone().or_else(|| loaded.config.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let sink = Sink::new(dir, loaded.sha256.clone())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} workers: {e}", args.jobs)))?;
    let ctx = Context { config: &loaded.config, sink, pool };
    let result = match args.command {
        Command::Analyze => commands::analyze_cmd(&ctx),
        Command::Spectrum => commands::spectrum_cmd(&ctx),
        Command::Reduce => commands::reduce_cmd(&ctx),
        Command::Evolve => commands::evolve_cmd(&ctx),
        Command::Sweep => commands::sweep_cmd(&ctx),
        Command::Graph => commands::graph_cmd(&ctx),
    };
    if let Err(CliError::Hypothesis(report)) = &result {
        ctx.sink.json("assumptions.json", report)?;
    }
    result
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Hypothesis(report) = &e {
                if let Ok(s) = serde_json::to_string_pretty(report) {
                    eprintln!("{s}");
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}
