use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use frislab::harness::{
    list_presets, parse_config, preset, run_analytic, run_sweep_with, write_csv, SweepResult,
    SweepSpec,
};

#[derive(Parser)]
#[command(
    name = "frislab",
    version,
    about = "FRIS index-modulation BER simulator"
)]
struct Cli {
    /// Override the configured RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 uses all cores).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate a named figure preset.
    Preset {
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Union bound only (independent-element model).
    Analytic {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// List available presets.
    Presets,
}

fn load(path: &PathBuf) -> Result<SweepSpec> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}

fn simulate(mut spec: SweepSpec, cli: &Cli) -> Result<SweepResult> {
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    Ok(run_sweep_with(&spec, cli.workers)?)
}

fn save(result: &SweepResult, out: &PathBuf) -> Result<()> {
    write_csv(result, out).with_context(|| format!("writing {}", out.display()))?;
    eprintln!("wrote {} points to {}", result.points.len(), out.display());
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run { config, out } => {
            let result = simulate(load(config)?, &cli)?;
            save(&result, out)
        }
        Command::Preset { name, out } => {
            let spec = preset(name)
                .with_context(|| format!("unknown preset `{name}` (see `frislab presets`)"))?;
            let result = simulate(spec, &cli)?;
            save(&result, out)
        }
        Command::Analytic { config, out } => {
            let result = run_analytic(&load(config)?)?;
            save(&result, out)
        }
        Command::Presets => {
            for (name, about) in list_presets() {
                println!("{name:<18} {about}");
            }
            Ok(())
        }
    }
}
