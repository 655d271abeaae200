//! Run summaries and multi-run aggregation.
//!
//! Every run writes a summary.toml; a repetitions batch additionally gets an
//! aggregate.toml where each metric appears as `[mean, two_sigma]` over the
//! runs (two sample standard deviations, matching how spreads are usually
//! quoted for small batches of independent runs).

use std::path::Path;

use anyhow::{bail, Context, Result};
use lexgame_core::MetricsSummary;
use serde::{Deserialize, Serialize};

use crate::config::SceneHalf;

/// Serde adapter writing a u64 as a decimal string. TOML integers are
/// signed 64-bit, which derived seeds routinely overflow.
pub mod seed_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    #[serde(with = "seed_string")]
    pub seed: u64,
    pub training: TrainingSummary,
    #[serde(default, rename = "evaluation", skip_serializing_if = "Vec::is_empty")]
    pub evaluations: Vec<EvalResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub games: u64,
    pub success_overall: f64,
    pub coherence_overall: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_success: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_coherence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_inventory: Option<f64>,
    pub peak_window_inventory: f64,
}

impl From<&MetricsSummary> for TrainingSummary {
    fn from(m: &MetricsSummary) -> Self {
        TrainingSummary {
            games: m.games,
            success_overall: m.success_overall,
            coherence_overall: m.coherence_overall,
            window_success: m.window_success,
            window_coherence: m.window_coherence,
            window_inventory: m.window_inventory,
            peak_window_inventory: m.peak_window_inventory,
        }
    }
}

/// One frozen evaluation: overall success/coherence over its games, plus
/// the windowed inventory (words in active use at evaluation time).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub after: u64,
    pub world: String,
    pub scenes: SceneHalf,
    pub games: u64,
    pub success: f64,
    pub coherence: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inventory: Option<f64>,
}

impl EvalResult {
    pub fn new(
        after: u64,
        world: &str,
        scenes: SceneHalf,
        summary: &MetricsSummary,
    ) -> Self {
        EvalResult {
            after,
            world: world.into(),
            scenes,
            games: summary.games,
            success: summary.success_overall,
            coherence: summary.coherence_overall,
            inventory: summary.window_inventory,
        }
    }
}

pub fn write_summary(path: &Path, summary: &RunSummary) -> Result<()> {
    let text = toml::to_string(summary).context("serializing summary")?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_summary(path: &Path) -> Result<RunSummary> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// `[mean, 2 * sample std]` of a batch of values. Identical values report
/// exactly [value, 0], untouched by summation rounding.
fn spread(values: &[f64]) -> [f64; 2] {
    if values.windows(2).all(|w| w[0] == w[1]) {
        return [values[0], 0.0];
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    [mean, 2.0 * var.sqrt()]
}

/// Spread of an optional metric: present only when every run reports it.
fn spread_opt(values: Vec<Option<f64>>) -> Option<[f64; 2]> {
    let present: Vec<f64> = values.iter().copied().collect::<Option<Vec<_>>>()?;
    Some(spread(&present))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateSummary {
    pub runs: usize,
    pub training: AggregateTraining,
    #[serde(default, rename = "evaluation", skip_serializing_if = "Vec::is_empty")]
    pub evaluations: Vec<AggregateEval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateTraining {
    pub games: u64,
    pub success_overall: [f64; 2],
    pub coherence_overall: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_success: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_coherence: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_inventory: Option<[f64; 2]>,
    pub peak_window_inventory: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateEval {
    pub after: u64,
    pub world: String,
    pub scenes: SceneHalf,
    pub games: u64,
    pub success: [f64; 2],
    pub coherence: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inventory: Option<[f64; 2]>,
}

/// Merges run summaries into mean ± 2σ rows. The runs must agree on shape:
/// same game count and the same evaluation schedule.
pub fn aggregate(summaries: &[RunSummary]) -> Result<AggregateSummary> {
    let Some(first) = summaries.first() else { bail!("nothing to aggregate") };
    for (i, s) in summaries.iter().enumerate() {
        if s.training.games != first.training.games {
            bail!("run {i} played {} games, run 0 played {}", s.training.games, first.training.games);
        }
        if s.evaluations.len() != first.evaluations.len() {
            bail!("run {i} has {} evaluations, run 0 has {}", s.evaluations.len(), first.evaluations.len());
        }
        for (j, (a, b)) in s.evaluations.iter().zip(&first.evaluations).enumerate() {
            if (a.after, &a.world, a.scenes, a.games) != (b.after, &b.world, b.scenes, b.games) {
                bail!("run {i}, evaluation {j}: schedule differs from run 0");
            }
        }
    }
    let t = |f: fn(&TrainingSummary) -> f64| -> [f64; 2] {
        spread(&summaries.iter().map(|s| f(&s.training)).collect::<Vec<_>>())
    };
    let t_opt = |f: fn(&TrainingSummary) -> Option<f64>| -> Option<[f64; 2]> {
        spread_opt(summaries.iter().map(|s| f(&s.training)).collect())
    };
    let training = AggregateTraining {
        games: first.training.games,
        success_overall: t(|s| s.success_overall),
        coherence_overall: t(|s| s.coherence_overall),
        window_success: t_opt(|s| s.window_success),
        window_coherence: t_opt(|s| s.window_coherence),
        window_inventory: t_opt(|s| s.window_inventory),
        peak_window_inventory: t(|s| s.peak_window_inventory),
    };
    let evaluations = first
        .evaluations
        .iter()
        .enumerate()
        .map(|(j, e)| AggregateEval {
            after: e.after,
            world: e.world.clone(),
            scenes: e.scenes,
            games: e.games,
            success: spread(
                &summaries.iter().map(|s| s.evaluations[j].success).collect::<Vec<_>>(),
            ),
            coherence: spread(
                &summaries.iter().map(|s| s.evaluations[j].coherence).collect::<Vec<_>>(),
            ),
            inventory: spread_opt(
                summaries.iter().map(|s| s.evaluations[j].inventory).collect(),
            ),
        })
        .collect();
    Ok(AggregateSummary { runs: summaries.len(), training, evaluations })
}

pub fn write_aggregate(path: &Path, agg: &AggregateSummary) -> Result<()> {
    let text = toml::to_string(agg).context("serializing aggregate")?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
