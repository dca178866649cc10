use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use collisional_cli::*;

#[derive(Parser)]
#[command(name = "collisional", version, about = "Collisional thermalization of qubit chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario file; reference parameters when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides outputs.directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// exact | narrow | band-resolved | local (overrides the file).
    #[arg(long, global = true)]
    variant: Option<String>,
    /// Worker threads for assembly and sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Reserved; every computation is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Chain eigenvalues and band structure.
    Spectrum,
    /// Assemble and persist the collision tensor with its checks.
    Tensor,
    /// Trajectory of the observables.
    Evolve,
    /// Stationary state of the generator.
    Steady,
    /// Resource-theoretic classification of the map.
    Classify,
    /// Every stage of the pipeline.
    Run,
    /// One full run per value of the configured sweep.
    Sweep,
    /// Datasets for fig2, fig3 or fig4.
    Reproduce { figure: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some()
                || e.downcast_ref::<UnknownFigure>().is_some()
            {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global()?;
    }
    let _ = cli.seed;
    let mut config = match &cli.config {
        Some(path) => parse_config(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(v) = cli.variant {
        config.variant = v;
        config.validate()?;
    }
    let dir = cli.out.unwrap_or_else(|| PathBuf::from(&config.outputs.directory));
    let stage = match cli.command {
        Command::Spectrum => Stage::Spectrum,
        Command::Tensor => Stage::Tensor,
        Command::Evolve => Stage::Evolve,
        Command::Steady => Stage::Steady,
        Command::Classify => Stage::Classify,
        Command::Run => Stage::Full,
        Command::Sweep => {
            let m = run_sweep(&config, &dir)?;
            println!("sweep: {} artifacts in {}", m.artifacts.len(), dir.display());
            return Ok(());
        }
        Command::Reproduce { figure } => {
            let m = reproduce(&figure, &config, &dir)?;
            println!("{figure}: {} artifacts in {}", m.artifacts.len(), dir.display());
            return Ok(());
        }
    };
    let outcome = run_scenario(&config, &dir, stage)?;
    let m = &outcome.manifest;
    println!("{}: {} artifacts in {}", stage.name(), m.artifacts.len(), dir.display());
    for (name, value) in &m.checks {
        println!("  {name} = {value:e}");
    }
    for note in &m.notes {
        println!("  note: {note}");
    }
    Ok(())
}
