//! Experiment orchestration: config in, artifact directory out.
//!
//! A single run assembles worlds and population from the config under one
//! master seed, drives the engine through training games with evaluations
//! interleaved at their scheduled points, and writes records.jsonl,
//! metrics.csv, summary.toml, population.json, and manifest.toml. A
//! repetitions batch executes N such runs under seeds derived from the
//! master (rep-NNN directories) and aggregates their summaries. Identical
//! (config, seed) pairs produce byte-identical artifacts; runs only write
//! inside their own directory, so batch members can execute in parallel.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use lexgame_core::rng::{derive, stream_rng, Stream};
use lexgame_core::{
    Agent, ChannelTable, Engine, EventKind, GameRecord, MetricsTracker, Params, PerceptionProfile,
    Schedule, ScheduledEvent,
};
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::checkpoint;
use crate::config::{ConfigFile, EventKindCfg, SceneHalf, SensorSpec};
use crate::dataset::{self, write_scene_file, DatasetReport};
use crate::report::{self, EvalResult, RunSummary};

/// Where one run landed and what it measured.
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub summary: RunSummary,
}

/// Executes the whole experiment: one run in `out` directly, or a
/// repetitions batch in rep-NNN subdirectories plus an aggregate.toml.
pub fn run_experiment(
    cfg: &ConfigFile,
    seed: u64,
    out: &Path,
    jobs: usize,
) -> Result<Vec<RunArtifacts>> {
    let reps = cfg.repetitions.unwrap_or(1) as usize;
    if reps == 1 {
        let summary = run_single(cfg, seed, out)?;
        return Ok(vec![RunArtifacts { dir: out.to_path_buf(), summary }]);
    }
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let dirs: Vec<PathBuf> = (0..reps).map(|i| out.join(format!("rep-{i:03}"))).collect();
    let seeds: Vec<u64> = (0..reps).map(|i| derive(seed, Stream::Run(i as u32))).collect();
    let jobs = jobs.clamp(1, reps);

    let summaries: Vec<RunSummary> = if jobs == 1 {
        dirs.iter()
            .zip(&seeds)
            .map(|(dir, &s)| run_single(cfg, s, dir))
            .collect::<Result<_>>()?
    } else {
        let slots: Vec<Mutex<Option<Result<RunSummary>>>> =
            (0..reps).map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= reps {
                        break;
                    }
                    let r = run_single(cfg, seeds[i], &dirs[i]);
                    *slots[i].lock().unwrap() = Some(r);
                });
            }
        });
        slots
            .into_iter()
            .map(|slot| slot.into_inner().unwrap().expect("worker covered every slot"))
            .collect::<Result<_>>()?
    };

    let agg = report::aggregate(&summaries)?;
    report::write_aggregate(&out.join("aggregate.toml"), &agg)?;
    Ok(dirs
        .into_iter()
        .zip(summaries)
        .map(|(dir, summary)| RunArtifacts { dir, summary })
        .collect())
}

/// One complete run under `master` into `dir`.
pub fn run_single(cfg: &ConfigFile, master: u64, dir: &Path) -> Result<RunSummary> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let asm = dataset::assemble(cfg, master)?;
    if cfg.output.scene_files {
        write_scene_artifacts(&asm.worlds, &dir.join("scenes"))?;
    }
    let agents = build_population(cfg, master, &asm.table)?;
    let params = cfg.params.resolve();
    let schedule = build_schedule(cfg)?;
    let mut engine = Engine::new(
        params.clone(),
        agents,
        asm.worlds,
        schedule,
        cfg.games,
        master,
        Some(cfg.output.series_stride),
    )?;
    write_manifest(&dir.join("manifest.toml"), cfg, master, &asm.table, &asm.reports, &engine)?;

    let mut records = match cfg.output.records {
        true => Some(JsonlWriter::create(&dir.join("records.jsonl"))?),
        false => None,
    };
    let mut evals: Vec<(usize, &crate::config::EvalCfg)> =
        cfg.evaluations.iter().enumerate().collect();
    evals.sort_by_key(|(_, e)| e.after);

    let mut results = Vec::with_capacity(evals.len());
    for (order, (cfg_idx, ev)) in evals.into_iter().enumerate() {
        engine
            .run_until(ev.after, |r| sink(&mut records, r))
            .with_context(|| format!("training before evaluation {cfg_idx}"))?;
        let world_name = ev.world.as_deref().unwrap_or(&cfg.datasets[0].name);
        let world_idx = cfg.dataset_index(world_name).expect("validated");
        let mut eval_records = match cfg.output.records {
            true => Some(JsonlWriter::create(&dir.join(format!("eval-{order:03}.jsonl")))?),
            false => None,
        };
        let summary = engine
            .evaluate(world_idx, ev.scenes == SceneHalf::Test, ev.games, |r| {
                sink(&mut eval_records, r)
            })
            .with_context(|| {
                format!("evaluation {cfg_idx} on {world_name:?} ({} scenes)", ev.scenes)
            })?;
        finish(eval_records)?;
        let result = EvalResult::new(ev.after, world_name, ev.scenes, &summary);
        eprintln!(
            "[lexgame] {}: eval after {} on {world_name}/{}: success {:.4}, coherence {:.4}",
            dir.display(),
            ev.after,
            ev.scenes,
            result.success,
            result.coherence
        );
        results.push(result);
    }
    engine.run(|r| sink(&mut records, r)).context("training")?;
    finish(records)?;

    write_series(&dir.join("metrics.csv"), engine.tracker())?;
    let summary = RunSummary {
        seed: master,
        training: (&engine.tracker().summary()).into(),
        evaluations: results,
    };
    report::write_summary(&dir.join("summary.toml"), &summary)?;
    if cfg.output.checkpoint {
        checkpoint::save(
            &dir.join("population.json"),
            master,
            engine.games_played(),
            &params,
            &asm.table,
            engine.agents(),
        )?;
    }
    eprintln!(
        "[lexgame] {}: {} games, training success {:.4}, coherence {:.4}",
        dir.display(),
        engine.games_played(),
        summary.training.success_overall,
        summary.training.coherence_overall
    );
    Ok(summary)
}

/// Resolves the population section: per-agent sensor endowments (all, an
/// independent random subset per agent, or one explicit list) plus the
/// perception profile with calibration shifts drawn from each agent's shift
/// stream in ascending channel order.
pub fn build_population(
    cfg: &ConfigFile,
    master: u64,
    table: &ChannelTable,
) -> Result<Vec<Agent>> {
    let all: Vec<u16> = (0..table.len() as u16).collect();
    let explicit = match &cfg.population.sensors {
        SensorSpec::Explicit { channels } => Some(
            table
                .indices(channels.iter().map(String::as_str))
                .context("resolving population sensors")?,
        ),
        SensorSpec::Random { random } if *random > table.len() => {
            bail!("sensors.random = {random} exceeds the {} available channels", table.len())
        }
        _ => None,
    };
    (0..cfg.population.size)
        .map(|i| {
            let sensors: Vec<u16> = match &cfg.population.sensors {
                SensorSpec::Keyword(_) => all.clone(),
                SensorSpec::Explicit { .. } => explicit.clone().unwrap(),
                SensorSpec::Random { random } => {
                    let mut rng = stream_rng(master, Stream::Endowment(i as u32));
                    let mut picks: Vec<u16> =
                        rand::seq::index::sample(&mut rng, table.len(), *random)
                            .into_iter()
                            .map(|j| j as u16)
                            .collect();
                    picks.sort_unstable();
                    picks
                }
            };
            let shift: Vec<(u16, f64)> = if cfg.population.shift_std > 0.0 {
                let mut rng = stream_rng(master, Stream::Shift(i as u32));
                let normal = Normal::new(0.0, cfg.population.shift_std).expect("validated std");
                sensors.iter().map(|&ch| (ch, normal.sample(&mut rng))).collect()
            } else {
                Vec::new()
            };
            let profile = PerceptionProfile::new(shift, cfg.population.noise_std);
            Ok(Agent::new(i as u32, sensors, profile))
        })
        .collect()
}

fn build_schedule(cfg: &ConfigFile) -> Result<Schedule> {
    let events = cfg
        .events
        .iter()
        .map(|e| {
            let kind = match &e.kind {
                EventKindCfg::SensorDefect { lose } => EventKind::SensorDefect { lose: *lose },
                EventKindCfg::SwitchWorld(name) => EventKind::SwitchWorld {
                    world: cfg.dataset_index(name).expect("validated"),
                },
                EventKindCfg::Freeze => EventKind::Freeze,
                EventKindCfg::Unfreeze => EventKind::Unfreeze,
            };
            ScheduledEvent { at: e.at, kind }
        })
        .collect();
    Ok(Schedule::new(events)?)
}

/// Writes each world's scene sets in the plain text scene-file format.
pub fn write_scene_artifacts(worlds: &[lexgame_core::WorldState], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for world in worlds {
        write_scene_file(&dir.join(format!("{}.train.scenes", world.name)), &world.train_scenes)?;
        if !world.test_scenes.is_empty() {
            write_scene_file(
                &dir.join(format!("{}.test.scenes", world.name)),
                &world.test_scenes,
            )?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    format: &'static str,
    #[serde(with = "crate::report::seed_string")]
    seed: u64,
    games: u64,
    series_stride: u64,
    channels: Vec<&'a str>,
    params: &'a Params,
    #[serde(rename = "dataset")]
    datasets: &'a [DatasetReport],
    #[serde(rename = "agent")]
    agents: Vec<ManifestAgent>,
}

#[derive(Serialize)]
struct ManifestAgent {
    id: u32,
    sensors: Vec<String>,
}

fn write_manifest(
    path: &Path,
    cfg: &ConfigFile,
    seed: u64,
    table: &ChannelTable,
    reports: &[DatasetReport],
    engine: &Engine,
) -> Result<()> {
    let manifest = Manifest {
        format: "run-manifest/v1",
        seed,
        games: cfg.games,
        series_stride: cfg.output.series_stride,
        channels: table.names().collect(),
        params: &cfg.params.resolve(),
        datasets: reports,
        agents: engine
            .agents()
            .iter()
            .map(|a| ManifestAgent {
                id: a.id,
                sensors: a.sensors().iter().map(|&ch| table.name(ch).to_owned()).collect(),
            })
            .collect(),
    };
    let text = toml::to_string(&manifest).context("serializing manifest")?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn write_series(path: &Path, tracker: &MetricsTracker) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["game", "success", "coherence", "inventory"]).context("series header")?;
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut rows = tracker.series().to_vec();
    if rows.last().map(|r| r.game) != Some(tracker.games()) {
        rows.push(tracker.snapshot());
    }
    for r in &rows {
        w.write_record([r.game.to_string(), fmt(r.success), fmt(r.coherence), fmt(r.inventory)])
            .context("series row")?;
    }
    w.flush().context("flushing series")?;
    Ok(())
}

/// Line-delimited JSON sink that latches its first IO error; the engine's
/// record callback cannot return one.
struct JsonlWriter {
    w: BufWriter<File>,
    err: Option<anyhow::Error>,
}

impl JsonlWriter {
    fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        Ok(JsonlWriter { w: BufWriter::new(file), err: None })
    }

    fn write(&mut self, record: &GameRecord) {
        if self.err.is_some() {
            return;
        }
        let result = serde_json::to_writer(&mut self.w, record)
            .map_err(anyhow::Error::from)
            .and_then(|()| self.w.write_all(b"\n").map_err(anyhow::Error::from));
        if let Err(e) = result {
            self.err = Some(e.context("writing records"));
        }
    }

    fn finish(mut self) -> Result<()> {
        if let Some(e) = self.err.take() {
            return Err(e);
        }
        self.w.flush().context("flushing records")?;
        Ok(())
    }
}

fn sink(writer: &mut Option<JsonlWriter>, record: &GameRecord) {
    if let Some(w) = writer.as_mut() {
        w.write(record);
    }
}

fn finish(writer: Option<JsonlWriter>) -> Result<()> {
    writer.map_or(Ok(()), JsonlWriter::finish)
}

/// Frozen evaluation of a saved population on a world rebuilt from the
/// config under the checkpoint's own seed.
pub struct EvalRequest<'a> {
    pub population: &'a Path,
    pub config: &'a ConfigFile,
    /// Dataset name; defaults to the config's first dataset.
    pub world: Option<&'a str>,
    pub scenes: SceneHalf,
    pub games: u64,
    /// Evaluation stream seed; defaults to one derived from the checkpoint.
    pub seed: Option<u64>,
    /// Also write eval.jsonl here.
    pub records_out: Option<&'a Path>,
}

pub fn evaluate_checkpoint(req: &EvalRequest) -> Result<EvalResult> {
    let loaded = checkpoint::load(req.population)?;
    let asm = dataset::assemble(req.config, loaded.seed)?;
    let cfg_channels: Vec<&str> = asm.table.names().collect();
    let ckpt_channels: Vec<&str> = loaded.table.names().collect();
    if cfg_channels != ckpt_channels {
        bail!(
            "config channels [{}] do not match checkpoint channels [{}]",
            cfg_channels.join(", "),
            ckpt_channels.join(", ")
        );
    }
    let world_name = req.world.unwrap_or(&req.config.datasets[0].name);
    let Some(world_idx) = req.config.dataset_index(world_name) else {
        bail!("config defines no dataset named {world_name:?}");
    };
    let eval_seed = req.seed.unwrap_or_else(|| derive(loaded.seed, Stream::Eval(u32::MAX)));
    let mut records = match req.records_out {
        Some(path) => Some(JsonlWriter::create(path)?),
        None => None,
    };
    let summary = lexgame_core::game::evaluate(
        &loaded.params,
        &loaded.agents,
        &asm.worlds[world_idx],
        req.scenes == SceneHalf::Test,
        req.games,
        eval_seed,
        |r| sink(&mut records, r),
    )
    .with_context(|| format!("evaluating on {world_name:?} ({} scenes)", req.scenes))?;
    finish(records)?;
    Ok(EvalResult::new(loaded.games_played, world_name, req.scenes, &summary))
}
