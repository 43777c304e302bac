//! `bosim`: run interferometer presets, sweep phases and report complementarity.

mod commands;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use bosim::experiments::Stage;
use bosim::optics::Synthesis;
use clap::{Args, Parser, Subcommand};

use crate::commands::SweepSpec;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical validation failed: {0}")]
    Numeric(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<bosim::Error> for CliError {
    fn from(e: bosim::Error) -> Self {
        use bosim::Error::*;
        match e {
            Numerical(_) | NotUnitary(_) | NotHermitian(_) | UndefinedVisibility => CliError::Numeric(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "bosim", version, about = "Simulate single- and two-photon interferometers on a qubit statevector")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact and sampled outcome histograms of one configuration.
    Run(RunArgs),
    /// Event probabilities along a phase sweep, as CSV (and optionally SVG).
    Sweep(SweepArgs),
    /// l1 coherence and predictability of the pre-measurement state along a phase sweep.
    Cr(CrArgs),
    /// List the built-in presets.
    Presets,
}

/// Where the configuration comes from: a preset name or a JSON file.
#[derive(Args, Clone)]
pub struct Source {
    /// Preset name, e.g. unruh/no-blockers.
    #[arg(value_name = "PRESET", conflicts_with_all = ["preset", "config"])]
    preset_name: Option<String>,
    /// Preset name (same as the positional argument).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Configuration file (a preset-style JSON document or a manifest.json).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override the shot count (0 disables sampling).
    #[arg(long)]
    shots: Option<u64>,
    /// Override the sampling seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Beam-splitter synthesis: exact, decomposed or trotter:<steps>.
    #[arg(long, value_parser = parse_synthesis)]
    synthesis: Option<Synthesis>,
    /// Directory for output files and manifest.json; stdout when omitted.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: Source,
    /// <phase>:<start>:<stop>:<points>, e.g. phi_h:0:2pi:65.
    #[arg(long, value_parser = parse_sweep)]
    sweep: SweepSpec,
    /// Worker threads for sweep points.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
    /// Also write sweep.svg (requires --out).
    #[arg(long, requires = "out")]
    svg: bool,
}

#[derive(Args)]
struct CrArgs {
    #[command(flatten)]
    source: Source,
    /// Phase grid; defaults to the first phase of the experiment over [0, 2π] with 65 points.
    #[arg(long, value_parser = parse_sweep)]
    sweep: Option<SweepSpec>,
    /// Checkpoint whose state is analyzed.
    #[arg(long, default_value = "after_bs2", value_parser = parse_stage)]
    stage: Stage,
    /// Blocker record (e.g. 0) selecting one branch when blockers make the state a mixture.
    #[arg(long)]
    branch: Option<String>,
    /// Worker threads for grid points.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
    /// Also write cr.svg (requires --out).
    #[arg(long, requires = "out")]
    svg: bool,
}

fn parse_synthesis(s: &str) -> Result<Synthesis, String> {
    s.parse().map_err(|e: bosim::Error| e.to_string())
}

fn parse_sweep(s: &str) -> Result<SweepSpec, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

fn parse_stage(s: &str) -> Result<Stage, String> {
    let stage: Stage = s.parse().map_err(|e: bosim::Error| e.to_string())?;
    if stage == Stage::Full {
        return Err("the complete circuit ends in measurements; pick a checkpoint before detection".into());
    }
    Ok(stage)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => commands::run(&a.source),
        Command::Sweep(a) => commands::sweep(&a.source, &a.sweep, a.jobs as usize, a.svg),
        Command::Cr(a) => commands::cr(&a.source, a.sweep.as_ref(), a.stage, a.branch.as_deref(), a.jobs as usize, a.svg),
        Command::Presets => {
            for name in bosim::experiments::presets::names() {
                println!("{name}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
