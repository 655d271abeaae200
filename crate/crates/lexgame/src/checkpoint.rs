//! Population checkpoints.
//!
//! A checkpoint is a versioned JSON document holding the run seed, the game
//! counter, the learning parameters, the channel table, and every agent with
//! its full inventory (Welford accumulators and weight logits included).
//! Channels appear under their names, not their interned indices, so a
//! checkpoint stays readable and survives being loaded next to a config that
//! interns the same channels differently. Round-trips are bit-exact: floats
//! are serialized in shortest-round-trip form and maps are ordered.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use lexgame_core::concept::ChannelStat;
use lexgame_core::{Agent, ChannelTable, Concept, Params, PerceptionProfile, Word, WordForm};
use serde::{Deserialize, Serialize};

pub const FORMAT: &str = "population/v1";

#[derive(Debug, Serialize, Deserialize)]
pub struct PopulationFile {
    pub format: String,
    /// Master seed of the run that produced this population.
    pub seed: u64,
    pub games_played: u64,
    pub params: Params,
    /// The run's full channel table, sorted.
    pub channels: Vec<String>,
    pub agents: Vec<AgentRepr>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AgentRepr {
    pub id: u32,
    pub sensors: Vec<String>,
    pub noise_std: f64,
    pub shift: BTreeMap<String, f64>,
    pub inventory: Vec<WordRepr>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WordRepr {
    pub form: String,
    pub score: f64,
    pub concept: BTreeMap<String, StatRepr>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StatRepr {
    pub mean: f64,
    pub m2: f64,
    pub count: u64,
    pub weight_logit: f64,
}

pub fn save(
    path: &Path,
    seed: u64,
    games_played: u64,
    params: &Params,
    table: &ChannelTable,
    agents: &[Agent],
) -> Result<()> {
    let file = PopulationFile {
        format: FORMAT.into(),
        seed,
        games_played,
        params: params.clone(),
        channels: table.names().map(str::to_owned).collect(),
        agents: agents.iter().map(|a| agent_repr(a, table)).collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).context("serializing population")?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn agent_repr(agent: &Agent, table: &ChannelTable) -> AgentRepr {
    let name = |ch: u16| table.name(ch).to_owned();
    AgentRepr {
        id: agent.id,
        sensors: agent.sensors().iter().map(|&ch| name(ch)).collect(),
        noise_std: agent.perception().noise_std,
        shift: agent.perception().shift().iter().map(|&(ch, v)| (name(ch), v)).collect(),
        inventory: agent
            .inventory()
            .iter()
            .map(|w| WordRepr {
                form: w.form.as_str().into(),
                score: w.score,
                concept: w
                    .concept
                    .entries()
                    .iter()
                    .map(|(ch, s)| {
                        (
                            name(*ch),
                            StatRepr {
                                mean: s.mean,
                                m2: s.m2,
                                count: s.count,
                                weight_logit: s.weight_logit,
                            },
                        )
                    })
                    .collect(),
            })
            .collect(),
    }
}

pub struct LoadedPopulation {
    pub seed: u64,
    pub games_played: u64,
    pub params: Params,
    pub table: ChannelTable,
    pub agents: Vec<Agent>,
}

pub fn load(path: &Path) -> Result<LoadedPopulation> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: PopulationFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing checkpoint {}", path.display()))?;
    if file.format != FORMAT {
        bail!("{}: format {:?} is not {FORMAT:?}", path.display(), file.format);
    }
    let table = ChannelTable::from_names(file.channels.iter().cloned());
    if table.len() != file.channels.len() {
        bail!("{}: channel list contains duplicates", path.display());
    }
    let agents = file
        .agents
        .iter()
        .map(|a| restore_agent(a, &table))
        .collect::<Result<Vec<_>>>()
        .with_context(|| format!("restoring {}", path.display()))?;
    Ok(LoadedPopulation {
        seed: file.seed,
        games_played: file.games_played,
        params: file.params,
        table,
        agents,
    })
}

fn restore_agent(repr: &AgentRepr, table: &ChannelTable) -> Result<Agent> {
    let ctx = |what: &str| format!("agent {}: {what}", repr.id);
    let sensors = table.indices(repr.sensors.iter().map(String::as_str))
        .with_context(|| ctx("sensors"))?;
    let shift = repr
        .shift
        .iter()
        .map(|(n, &v)| Ok((table.index(n)?, v)))
        .collect::<Result<Vec<_>, lexgame_core::Error>>()
        .with_context(|| ctx("shift"))?;
    if repr.noise_std < 0.0 {
        bail!("agent {}: negative noise_std", repr.id);
    }
    let perception = PerceptionProfile::new(shift, repr.noise_std);
    let inventory = repr
        .inventory
        .iter()
        .map(|w| {
            let entries = w
                .concept
                .iter()
                .map(|(n, s)| {
                    Ok((
                        table.index(n)?,
                        ChannelStat {
                            mean: s.mean,
                            m2: s.m2,
                            count: s.count,
                            weight_logit: s.weight_logit,
                        },
                    ))
                })
                .collect::<Result<Vec<_>, lexgame_core::Error>>()?;
            Ok(Word {
                form: WordForm::new(w.form.clone()),
                concept: Concept::from_entries(entries)?,
                score: w.score,
            })
        })
        .collect::<Result<Vec<_>>>()
        .with_context(|| ctx("inventory"))?;
    Agent::from_parts(repr.id, sensors, perception, inventory).with_context(|| ctx("restore"))
}
