//! Experiment configuration: the TOML schema and its validated form.
//!
//! A config names one or more datasets, a population, optional parameter
//! overrides, scheduled events, and mid-run evaluations. Everything else
//! (per-run seeds, channel interning, scene ids) is derived at run time so
//! that a config plus a seed pins a run completely.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lexgame_core::Params;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// Master seed; overridable with `--seed`.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Training games to play.
    pub games: u64,
    /// Independent repetitions (fresh derived seed each); default 1.
    #[serde(default)]
    pub repetitions: Option<u32>,
    pub population: PopulationCfg,
    #[serde(default)]
    pub params: ParamsCfg,
    #[serde(rename = "dataset")]
    pub datasets: Vec<DatasetCfg>,
    #[serde(default, rename = "event")]
    pub events: Vec<EventCfg>,
    #[serde(default, rename = "evaluation")]
    pub evaluations: Vec<EvalCfg>,
    #[serde(default)]
    pub output: OutputCfg,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationCfg {
    pub size: usize,
    /// "all", `{ random = m }` (independent per agent), or
    /// `{ channels = [...] }` (same explicit set for every agent).
    #[serde(default)]
    pub sensors: SensorSpec,
    /// Std of the per-(agent, sensor) constant calibration offsets.
    #[serde(default)]
    pub shift_std: f64,
    /// Std of the fresh Gaussian perception noise per sensed value.
    #[serde(default)]
    pub noise_std: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SensorSpec {
    Keyword(String),
    Random { random: usize },
    Explicit { channels: Vec<String> },
}

impl Default for SensorSpec {
    fn default() -> Self {
        SensorSpec::Keyword("all".into())
    }
}

/// Optional overrides of the reference learning parameters.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsCfg {
    pub initial_score: Option<f64>,
    pub score_reward: Option<f64>,
    pub score_punishment: Option<f64>,
    pub inhibition_scale: Option<f64>,
    pub initial_sigma: Option<f64>,
    pub sigma_floor: Option<f64>,
    pub initial_weight: Option<f64>,
    pub weight_reward: Option<f64>,
    pub weight_punishment: Option<f64>,
    pub max_subset_channels: Option<usize>,
}

impl ParamsCfg {
    pub fn resolve(&self) -> Params {
        let mut p = Params::default();
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { p.$f = v; } )* };
        }
        take!(
            initial_score,
            score_reward,
            score_punishment,
            inhibition_scale,
            initial_sigma,
            sigma_floor,
            initial_weight,
            weight_reward,
            weight_punishment
        );
        if self.max_subset_channels.is_some() {
            p.max_subset_channels = self.max_subset_channels;
        }
        p
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetCfg {
    pub name: String,
    pub source: SourceCfg,
    /// CSV field delimiter; defaults to ','.
    #[serde(default)]
    pub delimiter: Option<char>,
    /// CSV columns dropped before normalization (labels, ids, timestamps).
    #[serde(default)]
    pub exclude_columns: Vec<String>,
    /// Sanity check on the loaded channel count, if given.
    #[serde(default)]
    pub expected_channels: Option<usize>,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    pub train_scenes: usize,
    #[serde(default)]
    pub test_scenes: usize,
    /// Inclusive [min, max] entities per scene.
    #[serde(default = "default_scene_size")]
    pub scene_size: [usize; 2],
    /// Read scenes from files instead of sampling them.
    #[serde(default)]
    pub scenes_from: Option<ScenesFromCfg>,
}

fn default_train_fraction() -> f64 {
    0.9
}

fn default_scene_size() -> [usize; 2] {
    [3, 10]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceCfg {
    /// Header row names the channels; every remaining column must be
    /// numeric. Values are min-max normalized per column.
    Csv(PathBuf),
    Synthetic(SyntheticCfg),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticCfg {
    pub clusters: usize,
    pub per_cluster: usize,
    pub channels: usize,
    /// Channels are named "c{first}".."c{first + channels - 1}".
    #[serde(default = "default_first_channel")]
    pub first_channel: usize,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_mean_min")]
    pub mean_min: f64,
    #[serde(default = "default_mean_max")]
    pub mean_max: f64,
}

fn default_first_channel() -> usize {
    1
}

fn default_sigma() -> f64 {
    0.03
}

fn default_mean_min() -> f64 {
    0.1
}

fn default_mean_max() -> f64 {
    0.9
}

impl SyntheticCfg {
    pub fn channel_names(&self) -> Vec<String> {
        (self.first_channel..self.first_channel + self.channels)
            .map(|i| format!("c{i}"))
            .collect()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenesFromCfg {
    pub train: PathBuf,
    #[serde(default)]
    pub test: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventCfg {
    /// Fires after this many games (0 = before the first game).
    pub at: u64,
    pub kind: EventKindCfg,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKindCfg {
    SensorDefect { lose: usize },
    SwitchWorld(String),
    Freeze,
    Unfreeze,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalCfg {
    /// Runs after this many training games (also 0 or `games`).
    pub after: u64,
    /// Dataset name; defaults to the first dataset.
    #[serde(default)]
    pub world: Option<String>,
    #[serde(default = "default_eval_scenes")]
    pub scenes: SceneHalf,
    pub games: u64,
}

fn default_eval_scenes() -> SceneHalf {
    SceneHalf::Test
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SceneHalf {
    Train,
    Test,
}

impl std::fmt::Display for SceneHalf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SceneHalf::Train => "train",
            SceneHalf::Test => "test",
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputCfg {
    /// Write per-game records to records.jsonl.
    #[serde(default = "default_true")]
    pub records: bool,
    /// Write the final population to population.json.
    #[serde(default = "default_true")]
    pub checkpoint: bool,
    /// Metric series sampling interval in games.
    #[serde(default = "default_stride")]
    pub series_stride: u64,
    /// Also write the generated scenes as text files.
    #[serde(default)]
    pub scene_files: bool,
}

fn default_true() -> bool {
    true
}

fn default_stride() -> u64 {
    1000
}

impl Default for OutputCfg {
    fn default() -> Self {
        OutputCfg {
            records: true,
            checkpoint: true,
            series_stride: default_stride(),
            scene_files: false,
        }
    }
}

impl ConfigFile {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: ConfigFile = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        // File paths inside a config are relative to the config itself.
        let base = path.parent().unwrap_or(Path::new("."));
        for ds in &mut cfg.datasets {
            if let SourceCfg::Csv(p) = &mut ds.source {
                *p = rebase(base, p);
            }
            if let Some(sf) = &mut ds.scenes_from {
                sf.train = rebase(base, &sf.train);
                if let Some(t) = &mut sf.test {
                    *t = rebase(base, t);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_str_validated(text: &str) -> Result<Self> {
        let cfg: ConfigFile = toml::from_str(text).context("parsing config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn dataset_index(&self, name: &str) -> Option<usize> {
        self.datasets.iter().position(|d| d.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        if self.games == 0 {
            bail!("games must be positive");
        }
        if self.population.size < 2 {
            bail!("population size must be at least 2");
        }
        if self.population.shift_std < 0.0 || self.population.noise_std < 0.0 {
            bail!("shift_std and noise_std must be non-negative");
        }
        match &self.population.sensors {
            SensorSpec::Keyword(k) if k == "all" => {}
            SensorSpec::Keyword(k) => bail!("unknown sensors keyword {k:?}; expected \"all\""),
            SensorSpec::Random { random } if *random == 0 => {
                bail!("sensors.random must be at least 1")
            }
            SensorSpec::Explicit { channels } if channels.is_empty() => {
                bail!("sensors.channels must not be empty")
            }
            _ => {}
        }
        if self.datasets.is_empty() {
            bail!("at least one [[dataset]] is required");
        }
        let mut names = std::collections::BTreeSet::new();
        for ds in &self.datasets {
            if !names.insert(ds.name.as_str()) {
                bail!("duplicate dataset name {:?}", ds.name);
            }
            if !(ds.train_fraction > 0.0 && ds.train_fraction < 1.0) {
                bail!("dataset {:?}: train_fraction must lie strictly in (0, 1)", ds.name);
            }
            if ds.train_scenes == 0 && ds.scenes_from.is_none() {
                bail!("dataset {:?}: train_scenes must be positive", ds.name);
            }
            let [lo, hi] = ds.scene_size;
            if lo < 2 || lo > hi {
                bail!("dataset {:?}: scene_size must satisfy 2 <= min <= max", ds.name);
            }
            if let SourceCfg::Synthetic(s) = &ds.source {
                if s.clusters == 0 || s.per_cluster == 0 || s.channels == 0 {
                    bail!("dataset {:?}: synthetic dimensions must be positive", ds.name);
                }
                if !(s.mean_min < s.mean_max) || s.sigma <= 0.0 {
                    bail!("dataset {:?}: bad synthetic spread", ds.name);
                }
            }
            if ds.delimiter.is_some() && matches!(ds.source, SourceCfg::Synthetic(_)) {
                bail!("dataset {:?}: delimiter only applies to csv sources", ds.name);
            }
        }
        for ev in &self.events {
            if ev.at > self.games {
                bail!("event at game {} is beyond the run ({} games)", ev.at, self.games);
            }
            match &ev.kind {
                EventKindCfg::SwitchWorld(name) if self.dataset_index(name).is_none() => {
                    bail!("event switches to unknown dataset {name:?}")
                }
                EventKindCfg::SensorDefect { lose: 0 } => {
                    bail!("sensor defect must lose at least one sensor")
                }
                _ => {}
            }
        }
        for ev in &self.evaluations {
            if ev.after > self.games {
                bail!("evaluation after game {} is beyond the run", ev.after);
            }
            if ev.games == 0 {
                bail!("evaluation games must be positive");
            }
            if let Some(w) = &ev.world {
                if self.dataset_index(w).is_none() {
                    bail!("evaluation references unknown dataset {w:?}");
                }
            }
        }
        if self.output.series_stride == 0 {
            bail!("series_stride must be positive");
        }
        if self.repetitions == Some(0) {
            bail!("repetitions must be positive");
        }
        Ok(())
    }
}

fn rebase(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        games = 1000
        [population]
        size = 4
        [[dataset]]
        name = "syn"
        source = { synthetic = { clusters = 4, per_cluster = 50, channels = 3 } }
        train_scenes = 200
        test_scenes = 20
    "#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = ConfigFile::from_str_validated(MINIMAL).unwrap();
        assert_eq!(cfg.games, 1000);
        assert!(matches!(&cfg.population.sensors, SensorSpec::Keyword(k) if k == "all"));
        assert_eq!(cfg.datasets[0].scene_size, [3, 10]);
        assert_eq!(cfg.datasets[0].train_fraction, 0.9);
        assert_eq!(cfg.output.series_stride, 1000);
        assert!(cfg.output.records && cfg.output.checkpoint);
        let params = cfg.params.resolve();
        assert_eq!(params, Params::default());
    }

    #[test]
    fn param_overrides_apply() {
        let text = format!("{MINIMAL}\n[params]\nscore_reward = 0.2\nmax_subset_channels = 3\n");
        let cfg = ConfigFile::from_str_validated(&text).unwrap();
        let p = cfg.params.resolve();
        assert_eq!(p.score_reward, 0.2);
        assert_eq!(p.max_subset_channels, Some(3));
        assert_eq!(p.score_punishment, -0.1);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = format!("{MINIMAL}\ntypo_field = 3\n");
        assert!(ConfigFile::from_str_validated(&text).is_err());
        let text = format!("{MINIMAL}\n[params]\nscoer_reward = 0.2\n");
        assert!(ConfigFile::from_str_validated(&text).is_err());
    }

    #[test]
    fn event_and_eval_parsing() {
        let text = format!(
            r#"{MINIMAL}
            [[event]]
            at = 500
            kind = {{ sensor_defect = {{ lose = 1 }} }}
            [[event]]
            at = 600
            kind = "freeze"
            [[evaluation]]
            after = 1000
            games = 100
            scenes = "test"
            "#
        );
        let cfg = ConfigFile::from_str_validated(&text).unwrap();
        assert!(matches!(cfg.events[0].kind, EventKindCfg::SensorDefect { lose: 1 }));
        assert!(matches!(cfg.events[1].kind, EventKindCfg::Freeze));
        assert_eq!(cfg.evaluations[0].scenes, SceneHalf::Test);
    }

    #[test]
    fn validation_catches_bad_references() {
        let text = format!(
            r#"{MINIMAL}
            [[event]]
            at = 1
            kind = {{ switch_world = "nope" }}
            "#
        );
        assert!(ConfigFile::from_str_validated(&text).is_err());
        let text = format!(
            r#"{MINIMAL}
            [[evaluation]]
            after = 5000
            games = 10
            "#
        );
        assert!(ConfigFile::from_str_validated(&text).is_err(), "eval beyond run");
        let text = MINIMAL.replace("size = 4", "size = 1");
        assert!(ConfigFile::from_str_validated(&text).is_err(), "population too small");
    }

    #[test]
    fn sensor_spec_variants_parse() {
        let text = MINIMAL.replace("size = 4", "size = 4\nsensors = { random = 2 }");
        let cfg = ConfigFile::from_str_validated(&text).unwrap();
        assert!(matches!(cfg.population.sensors, SensorSpec::Random { random: 2 }));
        let text = MINIMAL.replace("size = 4", "size = 4\nsensors = { channels = [\"c1\"] }");
        let cfg = ConfigFile::from_str_validated(&text).unwrap();
        assert!(matches!(&cfg.population.sensors, SensorSpec::Explicit { channels } if channels == &["c1"]));
    }
}
