use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use darkgate_experiments::{run_scenario, write_all, ExperimentError, OutputFile, Result, Scenario, ScenarioConfig};
use serde::Serialize;

/// Simulate dark-state gates on an inhomogeneous ion ensemble.
#[derive(Parser)]
#[command(name = "darkgate", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML file overlaid on the preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the ensemble seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base parameter set.
    #[arg(long, global = true, default_value = darkgate_experiments::DEFAULT_PRESET)]
    preset: String,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Absorption spectrum of the ensemble.
    Spectrum,
    /// |0⟩ → |1⟩ population transfer through the excited state.
    Transfer,
    /// Three-axis tomography of the six cardinal states.
    Tomo,
    /// Free induction decay of the qubit coherence.
    Fid,
    /// Grid over one or two world parameters.
    Sweep,
}

impl Command {
    fn scenario(self) -> Scenario {
        match self {
            Command::Spectrum => Scenario::Spectrum,
            Command::Transfer => Scenario::Transfer,
            Command::Tomo => Scenario::Tomography,
            Command::Fid => Scenario::Fid,
            Command::Sweep => Scenario::Sweep,
        }
    }
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    message: String,
}

fn load(cli: &Cli) -> Result<ScenarioConfig> {
    let scenario = cli.command.scenario();
    let mut cfg = match &cli.common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
                path: path.clone(),
                source,
            })?;
            ScenarioConfig::from_toml(&text, &cli.common.preset, scenario)?
        }
        None => ScenarioConfig::preset(&cli.common.preset, scenario)?,
    };
    if let Some(seed) = cli.common.seed {
        cfg.world.ensemble.rng_seed = seed;
    }
    if let Some(out) = &cli.common.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<PathBuf> {
    let cfg = load(cli)?;
    let files = run_scenario(&cfg)?;
    write_all(&cfg.output_dir, &files)?;
    Ok(cfg.output_dir)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(dir) => {
            println!("{} results written to {}", cli.command.scenario().name(), dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let record = ErrorRecord {
                error: e.kind(),
                message: e.to_string(),
            };
            let dir = cli.common.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            match OutputFile::json("error.json", &record) {
                Ok(file) => {
                    eprint!("{}", String::from_utf8_lossy(&file.bytes));
                    if let Err(w) = write_all(&dir, &[file]) {
                        eprintln!("could not write error record: {w}");
                    }
                }
                Err(_) => eprintln!("{}: {}", record.error, record.message),
            }
            ExitCode::FAILURE
        }
    }
}
