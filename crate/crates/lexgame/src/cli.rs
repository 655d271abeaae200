//! Command-line surface.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use crate::config::{ConfigFile, SceneHalf};
use crate::presets;
use crate::report;
use crate::runner;

#[derive(Parser)]
#[command(
    name = "lexgame",
    version,
    about = "Referential language games over feature datasets: a population of \
             agents converges on an emergent lexicon"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Run an experiment and write its artifact directory
    Run {
        /// Experiment config (TOML)
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Built-in config by name (see `lexgame presets`)
        #[arg(long)]
        preset: Option<String>,
        /// Master seed; overrides the config's seed
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the config's repetition count
        #[arg(long)]
        repetitions: Option<u32>,
        /// Repetitions running in parallel
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Frozen evaluation of a saved population checkpoint
    Evaluate {
        /// population.json from a previous run
        #[arg(long)]
        population: PathBuf,
        /// Config defining the datasets (worlds are rebuilt under the
        /// checkpoint's seed)
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Built-in config by name
        #[arg(long)]
        preset: Option<String>,
        /// Dataset to evaluate on; defaults to the config's first
        #[arg(long)]
        world: Option<String>,
        /// Which scene half to draw from
        #[arg(long, value_enum, default_value_t = SceneHalf::Test)]
        scenes: SceneHalf,
        /// Evaluation games to play
        #[arg(long)]
        games: u64,
        /// Evaluation stream seed; defaults to one derived from the
        /// checkpoint
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the evaluation's game records here (JSONL)
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Build the scene/split files a config implies, without running games
    Scenes {
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Master seed; overrides the config's seed
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Merge run summaries into a mean ± 2σ table
    Aggregate {
        /// summary.toml files from the runs to merge
        #[arg(required = true)]
        summaries: Vec<PathBuf>,
        /// Write the aggregate here instead of stdout only
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List built-in experiment configs, or print one
    Presets {
        /// Preset to print (omit to list all names)
        name: Option<String>,
        /// Write the config to a file instead of stdout
        #[arg(long, requires = "name")]
        out: Option<PathBuf>,
    },
}

pub fn execute(cli: Cli) -> Result<()> {
    let stdout = run_command(cli.command)?;
    emit(&stdout)
}

/// Runs a subcommand and returns what belongs on stdout.
fn run_command(command: Command) -> Result<String> {
    match command {
        Command::Run { config, preset, seed, out, repetitions, jobs } => {
            let mut cfg = load_config(config.as_deref(), preset.as_deref())?;
            if let Some(r) = repetitions {
                cfg.repetitions = Some(r);
                cfg.validate()?;
            }
            let seed = resolve_seed(seed, &cfg)?;
            let artifacts = runner::run_experiment(&cfg, seed, &out, jobs)?;
            if artifacts.len() == 1 {
                Ok(toml::to_string(&artifacts[0].summary)?)
            } else {
                let agg = report::aggregate(
                    &artifacts.iter().map(|a| a.summary.clone()).collect::<Vec<_>>(),
                )?;
                Ok(toml::to_string(&agg)?)
            }
        }
        Command::Evaluate { population, config, preset, world, scenes, games, seed, records } => {
            if games == 0 {
                bail!("--games must be positive");
            }
            let cfg = load_config(config.as_deref(), preset.as_deref())?;
            let result = runner::evaluate_checkpoint(&runner::EvalRequest {
                population: &population,
                config: &cfg,
                world: world.as_deref(),
                scenes,
                games,
                seed,
                records_out: records.as_deref(),
            })?;
            Ok(toml::to_string(&result)?)
        }
        Command::Scenes { config, preset, seed, out } => {
            let cfg = load_config(config.as_deref(), preset.as_deref())?;
            let seed = resolve_seed(seed, &cfg)?;
            let asm = crate::dataset::assemble(&cfg, seed)?;
            runner::write_scene_artifacts(&asm.worlds, &out)?;
            let mut lines = String::new();
            for world in &asm.worlds {
                lines.push_str(&format!(
                    "{}: {} train scenes, {} test scenes\n",
                    world.name,
                    world.train_scenes.len(),
                    world.test_scenes.len()
                ));
            }
            Ok(lines)
        }
        Command::Aggregate { summaries, out } => {
            let loaded = summaries
                .iter()
                .map(|p| report::read_summary(p))
                .collect::<Result<Vec<_>>>()?;
            let agg = report::aggregate(&loaded)?;
            if let Some(path) = &out {
                report::write_aggregate(path, &agg)?;
            }
            Ok(toml::to_string(&agg)?)
        }
        Command::Presets { name, out } => match name {
            None => Ok(presets::NAMES.map(|n| format!("{n}\n")).concat()),
            Some(name) => {
                let text = preset_toml(&name)?;
                match &out {
                    Some(path) => {
                        std::fs::write(path, &text)
                            .with_context(|| format!("writing {}", path.display()))?;
                        Ok(String::new())
                    }
                    None => Ok(text),
                }
            }
        },
    }
}

/// Prints to stdout, treating a closed pipe as a normal exit rather than a
/// panic (`lexgame presets | head` must not crash).
fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    match std::io::stdout().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => other.context("writing stdout"),
    }
}

fn load_config(config: Option<&Path>, preset: Option<&str>) -> Result<ConfigFile> {
    match (config, preset) {
        (Some(path), None) => ConfigFile::from_path(path),
        (None, Some(name)) => ConfigFile::from_str_validated(&preset_toml(name)?)
            .with_context(|| format!("preset {name:?}")),
        (None, None) => bail!("pass --config <file> or --preset <name>"),
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    }
}

fn preset_toml(name: &str) -> Result<String> {
    presets::toml_for(name)
        .with_context(|| format!("unknown preset {name:?}; run `lexgame presets` for the list"))
}

fn resolve_seed(flag: Option<u64>, cfg: &ConfigFile) -> Result<u64> {
    flag.or(cfg.seed).context("no seed: set one in the config or pass --seed")
}
