//! Dataset loading and world assembly.
//!
//! A run's worlds are built in two passes. First every dataset source is
//! loaded raw (CSV parsed and min-max normalized, or synthetic clusters
//! drawn from the dataset's seed stream), which yields the channel names.
//! The union of all names becomes the run's single channel table, so the
//! same physical channel gets the same index in every world and agents can
//! carry sensors across worlds. Second, each dataset's rows become entities
//! and its scenes are either sampled (split stream + scene streams) or read
//! from scene files. Scene ids are offset so they stay unique across
//! datasets and across the train/test halves.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use lexgame_core::rng::{stream_rng, Stream};
use lexgame_core::world::{
    build_scenes, generate_synthetic, normalize_columns, split_entities, SyntheticSpec,
};
use lexgame_core::{ChannelTable, Entity, Scene, WorldState};
use serde::Serialize;

use crate::config::{ConfigFile, DatasetCfg, SourceCfg};

/// A loaded source before channel interning: column names plus row-major
/// values aligned with them.
#[derive(Debug)]
pub struct RawDataset {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Per-column (min, max) before normalization; None for synthetic
    /// sources, which are generated inside [0, 1] and not rescaled.
    pub ranges: Option<Vec<(f64, f64)>>,
    pub source_label: String,
}

/// Run-manifest entry describing how one world was built.
#[derive(Debug, Clone, Serialize)]
pub struct DatasetReport {
    pub name: String,
    pub source: String,
    pub entities: usize,
    pub channels: Vec<String>,
    pub train_entities: usize,
    pub test_entities: usize,
    pub train_scenes: usize,
    pub test_scenes: usize,
}

/// Everything derived from the `[[dataset]]` sections for one run.
#[derive(Debug)]
pub struct Assembly {
    pub table: ChannelTable,
    pub worlds: Vec<WorldState>,
    pub reports: Vec<DatasetReport>,
}

/// Loads all sources, interns the union of their channels, and builds one
/// world per dataset under `master_seed`.
pub fn assemble(cfg: &ConfigFile, master_seed: u64) -> Result<Assembly> {
    let raws: Vec<RawDataset> = cfg
        .datasets
        .iter()
        .enumerate()
        .map(|(i, ds)| load_raw(ds, master_seed, i as u32))
        .collect::<Result<_>>()?;
    let table = ChannelTable::from_names(raws.iter().flat_map(|r| r.names.iter().cloned()));
    let mut worlds = Vec::with_capacity(raws.len());
    let mut reports = Vec::with_capacity(raws.len());
    let mut scene_offset = 0u32;
    for (i, (ds, raw)) in cfg.datasets.iter().zip(&raws).enumerate() {
        let (world, report, next_offset) =
            build_world(ds, raw, &table, master_seed, i as u32, scene_offset)?;
        worlds.push(world);
        reports.push(report);
        scene_offset = next_offset;
    }
    Ok(Assembly { table, worlds, reports })
}

/// Loads one source into column names and normalized rows.
pub fn load_raw(ds: &DatasetCfg, master_seed: u64, dataset_index: u32) -> Result<RawDataset> {
    let mut raw = match &ds.source {
        SourceCfg::Csv(path) => load_csv(path, ds.delimiter, &ds.exclude_columns)
            .with_context(|| format!("dataset {:?}", ds.name))?,
        SourceCfg::Synthetic(spec) => {
            let names = spec.channel_names();
            // Local indices 0..n keep generation order equal to name order;
            // the global table may intern them anywhere.
            let core_spec = SyntheticSpec {
                clusters: spec.clusters,
                entities_per_cluster: spec.per_cluster,
                channels: (0..names.len() as u16).collect(),
                sigma: spec.sigma,
                mean_range: (spec.mean_min, spec.mean_max),
            };
            let mut rng = stream_rng(master_seed, Stream::Synthetic(dataset_index));
            let (entities, _labels) = generate_synthetic(&core_spec, &mut rng);
            let rows = entities
                .iter()
                .map(|e| e.features().iter().map(|&(_, v)| v).collect())
                .collect();
            RawDataset {
                names,
                rows,
                ranges: None,
                source_label: format!(
                    "synthetic({} clusters x {})",
                    spec.clusters, spec.per_cluster
                ),
            }
        }
    };
    if let Some(expected) = ds.expected_channels {
        if raw.names.len() != expected {
            bail!(
                "dataset {:?}: expected {} channels, loaded {} ({})",
                ds.name,
                expected,
                raw.names.len(),
                raw.names.join(", ")
            );
        }
    }
    if raw.rows.len() < 2 {
        bail!("dataset {:?}: needs at least two entities", ds.name);
    }
    raw.source_label = format!("{} [{}x{}]", raw.source_label, raw.rows.len(), raw.names.len());
    Ok(raw)
}

fn load_csv(path: &Path, delimiter: Option<char>, exclude: &[String]) -> Result<RawDataset> {
    let delim = match delimiter {
        None => b',',
        Some(c) if c.is_ascii() => c as u8,
        Some(c) => bail!("delimiter {c:?} is not an ascii character"),
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delim)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let headers: Vec<String> =
        reader.headers().context("reading header row")?.iter().map(str::to_owned).collect();
    for ex in exclude {
        if !headers.iter().any(|h| h == ex) {
            bail!("excluded column {ex:?} does not exist (columns: {})", headers.join(", "));
        }
    }
    let keep: Vec<usize> = (0..headers.len())
        .filter(|&j| !exclude.iter().any(|ex| ex == &headers[j]))
        .collect();
    if keep.is_empty() {
        bail!("all columns excluded");
    }
    let names: Vec<String> = keep.iter().map(|&j| headers[j].clone()).collect();
    {
        let mut sorted = names.clone();
        sorted.sort();
        if let Some(dup) = sorted.windows(2).find(|w| w[0] == w[1]) {
            bail!("duplicate column name {:?}", dup[0]);
        }
    }
    let mut rows = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("reading data row {}", r + 1))?;
        if record.len() != headers.len() {
            bail!("row {} has {} fields, header has {}", r + 1, record.len(), headers.len());
        }
        let row: Vec<f64> = keep
            .iter()
            .map(|&j| {
                record[j].trim().parse::<f64>().map_err(|e| {
                    anyhow!("row {}, column {:?}: {e} (value {:?})", r + 1, headers[j], &record[j])
                })
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("{} has no data rows", path.display());
    }
    let ranges = normalize_columns(&mut rows);
    Ok(RawDataset {
        names,
        rows,
        ranges: Some(ranges),
        source_label: format!("csv:{}", path.display()),
    })
}

/// Turns a loaded source into a world: entities with interned channels plus
/// sampled or file-provided scenes. Returns the next free scene id.
pub fn build_world(
    ds: &DatasetCfg,
    raw: &RawDataset,
    table: &ChannelTable,
    master_seed: u64,
    dataset_index: u32,
    scene_offset: u32,
) -> Result<(WorldState, DatasetReport, u32)> {
    let indices: Vec<u16> = raw
        .names
        .iter()
        .map(|n| table.index(n))
        .collect::<Result<_, _>>()
        .expect("table was built from these names");
    let entities: Vec<Entity> = raw
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            Entity::new(i as u32, indices.iter().copied().zip(row.iter().copied()).collect())
        })
        .collect();
    let ids: Vec<u32> = (0..entities.len() as u32).collect();

    let [min_size, max_size] = ds.scene_size;
    let (train, test, train_ids, test_ids) = match &ds.scenes_from {
        Some(files) => {
            let train = read_scene_file(&files.train, scene_offset)
                .with_context(|| format!("train scenes of dataset {:?}", ds.name))?;
            let next = scene_offset + train.len() as u32;
            let test = match &files.test {
                Some(path) => read_scene_file(path, next)
                    .with_context(|| format!("test scenes of dataset {:?}", ds.name))?,
                None => Vec::new(),
            };
            let train_ids = distinct_members(&train);
            let test_ids = distinct_members(&test);
            (train, test, train_ids, test_ids)
        }
        None => {
            let mut split_rng = stream_rng(master_seed, Stream::Split(dataset_index));
            let (train_ids, test_ids) = split_entities(&ids, ds.train_fraction, &mut split_rng)
                .with_context(|| format!("splitting dataset {:?}", ds.name))?;
            let mut rng =
                stream_rng(master_seed, Stream::Scenes { dataset: dataset_index, test: false });
            let train = build_scenes(
                &train_ids,
                ds.train_scenes,
                min_size,
                max_size,
                scene_offset,
                &mut rng,
            )
            .with_context(|| format!("building train scenes of dataset {:?}", ds.name))?;
            let test = if ds.test_scenes > 0 {
                let mut rng =
                    stream_rng(master_seed, Stream::Scenes { dataset: dataset_index, test: true });
                build_scenes(
                    &test_ids,
                    ds.test_scenes,
                    min_size,
                    max_size,
                    scene_offset + train.len() as u32,
                    &mut rng,
                )
                .with_context(|| format!("building test scenes of dataset {:?}", ds.name))?
            } else {
                Vec::new()
            };
            (train, test, train_ids, test_ids)
        }
    };

    let next_offset = scene_offset + train.len() as u32 + test.len() as u32;
    let report = DatasetReport {
        name: ds.name.clone(),
        source: raw.source_label.clone(),
        entities: entities.len(),
        channels: raw.names.clone(),
        train_entities: train_ids.len(),
        test_entities: test_ids.len(),
        train_scenes: train.len(),
        test_scenes: test.len(),
    };
    let world = WorldState::new(ds.name.clone(), entities, train, test)
        .with_context(|| format!("building world {:?}", ds.name))?;
    Ok((world, report, next_offset))
}

fn distinct_members(scenes: &[Scene]) -> Vec<u32> {
    let mut ids: Vec<u32> = scenes.iter().flat_map(|s| s.entities.iter().copied()).collect();
    ids.sort_unstable();
    ids.dedup();
    ids
}

/// Reads a scene file: one scene per line, comma-separated entity row
/// indices. Blank lines are skipped; ids are assigned by line order starting
/// at `first_id`.
pub fn read_scene_file(path: &Path, first_id: u32) -> Result<Vec<Scene>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut scenes = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut members: Vec<u32> = line
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|e| anyhow!("{}:{}: {e} (token {t:?})", path.display(), lineno + 1))
            })
            .collect::<Result<_>>()?;
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            bail!("{}:{}: scene repeats an entity", path.display(), lineno + 1);
        }
        scenes.push(Scene { id: first_id + scenes.len() as u32, entities: members });
    }
    if scenes.is_empty() {
        bail!("{} contains no scenes", path.display());
    }
    Ok(scenes)
}

/// Writes scenes in the format `read_scene_file` accepts.
pub fn write_scene_file(path: &Path, scenes: &[Scene]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    for scene in scenes {
        let line: Vec<String> = scene.entities.iter().map(|e| e.to_string()).collect();
        writeln!(w, "{}", line.join(",")).context("writing scene file")?;
    }
    w.flush().context("flushing scene file")?;
    Ok(())
}
