//! The referential game protocol and the experiment engine.
//!
//! One game: draw a scene from the active world's training scenes, draw a
//! speaker/listener pair and a topic, let both agents perceive the scene
//! privately, have the speaker name the topic (inventing when stuck), the
//! listener point, and both sides align on the shared outcome. The engine
//! repeats this for a configured number of games, firing scheduled events
//! (sensor defects, world switches, learning freezes) between games.
//!
//! Success feedback is the only information that crosses agents besides the
//! uttered form and, on failure, the revealed topic. The listener probe for
//! the coherence metric runs read-only before any alignment, so measuring
//! never changes the trajectory; the same holds for frozen evaluations,
//! which draw from their own seed streams.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{Agent, WordForm};
use crate::error::Error;
use crate::metrics::{MetricsSummary, MetricsTracker};
use crate::params::Params;
use crate::rng::{derive, stream_rng, Stream};
use crate::world::{Entity, PerceivedVector, Scene};

/// One dataset the population can play over: its entities plus prebuilt
/// training and held-out scene sets. Entity ids equal their positions.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub name: String,
    pub entities: Vec<Entity>,
    pub train_scenes: Vec<Scene>,
    pub test_scenes: Vec<Scene>,
}

impl WorldState {
    pub fn new(
        name: String,
        entities: Vec<Entity>,
        train_scenes: Vec<Scene>,
        test_scenes: Vec<Scene>,
    ) -> Result<Self, Error> {
        if entities.is_empty() {
            return Err(Error::InvalidSetup("world has no entities".into()));
        }
        if entities.iter().enumerate().any(|(i, e)| e.id as usize != i) {
            return Err(Error::InvalidSetup("entity ids must equal their positions".into()));
        }
        if train_scenes.is_empty() {
            return Err(Error::InvalidSetup("world has no training scenes".into()));
        }
        for scene in train_scenes.iter().chain(&test_scenes) {
            if scene.entities.len() < 2 {
                return Err(Error::InvalidSetup("scenes need at least two entities".into()));
            }
            if scene.entities.iter().any(|&e| e as usize >= entities.len()) {
                return Err(Error::InvalidSetup("scene references unknown entity".into()));
            }
        }
        Ok(WorldState { name, entities, train_scenes, test_scenes })
    }
}

/// What can happen between games.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EventKind {
    /// Every agent permanently loses this many randomly chosen sensors.
    SensorDefect { lose: usize },
    /// Games continue over a different world (continual learning).
    SwitchWorld { world: usize },
    /// Alignment, invention, and adoption stop; games keep being played.
    Freeze,
    /// Learning resumes.
    Unfreeze,
}

/// An event firing after game `at` completes (`at = 0` fires before the
/// first game).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledEvent {
    pub at: u64,
    pub kind: EventKind,
}

/// Validated, time-ordered event list.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Schedule {
    events: Vec<ScheduledEvent>,
}

impl Schedule {
    pub fn none() -> Self {
        Schedule { events: Vec::new() }
    }

    /// Orders events by firing time (stable, so same-time events keep their
    /// listed order) and validates the kinds.
    pub fn new(mut events: Vec<ScheduledEvent>) -> Result<Self, Error> {
        for e in &events {
            if let EventKind::SensorDefect { lose: 0 } = e.kind {
                return Err(Error::InvalidSchedule("sensor defect must lose at least one".into()));
            }
        }
        events.sort_by_key(|e| e.at);
        Ok(Schedule { events })
    }

    pub fn events(&self) -> &[ScheduledEvent] {
        &self.events
    }
}

/// Full trace of one game, sufficient to replay what was observable.
/// `topic` and `pointing` are indices into the scene's entity list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub game: u64,
    pub speaker: u32,
    pub listener: u32,
    pub scene: u32,
    pub topic: u32,
    pub utterance: Option<String>,
    pub pointing: Option<u32>,
    pub success: bool,
    pub invented: bool,
    pub adopted: bool,
    pub coherent: bool,
}

/// Drives a population through scheduled games over one or more worlds.
pub struct Engine {
    params: Params,
    agents: Vec<Agent>,
    worlds: Vec<WorldState>,
    active: usize,
    schedule: Schedule,
    next_event: usize,
    learning: bool,
    games_played: u64,
    total_games: u64,
    master_seed: u64,
    eval_count: u32,
    scene_rng: ChaCha8Rng,
    pair_rng: ChaCha8Rng,
    topic_rng: ChaCha8Rng,
    noise_rngs: Vec<ChaCha8Rng>,
    form_rngs: Vec<ChaCha8Rng>,
    event_rngs: Vec<ChaCha8Rng>,
    tracker: MetricsTracker,
}

impl Engine {
    pub fn new(
        params: Params,
        agents: Vec<Agent>,
        worlds: Vec<WorldState>,
        schedule: Schedule,
        total_games: u64,
        master_seed: u64,
        series_stride: Option<u64>,
    ) -> Result<Self, Error> {
        if agents.len() < 2 {
            return Err(Error::InvalidSetup("need at least two agents".into()));
        }
        if agents.iter().enumerate().any(|(i, a)| a.id as usize != i) {
            return Err(Error::InvalidSetup("agent ids must equal their positions".into()));
        }
        if agents.iter().any(|a| a.sensors().is_empty()) {
            return Err(Error::InvalidSetup("every agent needs at least one sensor".into()));
        }
        if worlds.is_empty() {
            return Err(Error::InvalidSetup("need at least one world".into()));
        }
        for e in schedule.events() {
            if let EventKind::SwitchWorld { world } = e.kind {
                if world >= worlds.len() {
                    return Err(Error::InvalidSchedule("switch to unknown world".into()));
                }
            }
        }
        let k = agents.len();
        let tracker = MetricsTracker::new(k, series_stride);
        Ok(Engine {
            params,
            worlds,
            active: 0,
            schedule,
            next_event: 0,
            learning: true,
            games_played: 0,
            total_games,
            master_seed,
            eval_count: 0,
            scene_rng: stream_rng(master_seed, Stream::SceneDraw),
            pair_rng: stream_rng(master_seed, Stream::PairDraw),
            topic_rng: stream_rng(master_seed, Stream::TopicDraw),
            noise_rngs: (0..k).map(|i| stream_rng(master_seed, Stream::Noise(i as u32))).collect(),
            form_rngs: (0..k).map(|i| stream_rng(master_seed, Stream::Forms(i as u32))).collect(),
            event_rngs: (0..k).map(|i| stream_rng(master_seed, Stream::Events(i as u32))).collect(),
            tracker,
            agents,
        })
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn worlds(&self) -> &[WorldState] {
        &self.worlds
    }

    pub fn active_world(&self) -> usize {
        self.active
    }

    pub fn learning(&self) -> bool {
        self.learning
    }

    pub fn games_played(&self) -> u64 {
        self.games_played
    }

    pub fn total_games(&self) -> u64 {
        self.total_games
    }

    pub fn tracker(&self) -> &MetricsTracker {
        &self.tracker
    }

    /// Plays every remaining game.
    pub fn run(&mut self, mut sink: impl FnMut(&GameRecord)) -> Result<(), Error> {
        self.run_until(self.total_games, &mut sink)
    }

    /// Plays games until `upto` (capped by the configured total) so callers
    /// can interleave mid-run evaluations. Resuming changes nothing: running
    /// to 5000 in two steps equals running there in one.
    pub fn run_until(&mut self, upto: u64, mut sink: impl FnMut(&GameRecord)) -> Result<(), Error> {
        self.fire_due()?;
        let upto = upto.min(self.total_games);
        while self.games_played < upto {
            self.play_one(&mut sink)?;
        }
        Ok(())
    }

    fn play_one(&mut self, sink: &mut impl FnMut(&GameRecord)) -> Result<(), Error> {
        let game = self.games_played + 1;
        let world_idx = self.active;
        let scene = {
            let scenes = &self.worlds[world_idx].train_scenes;
            scenes[self.scene_rng.random_range(0..scenes.len())].clone()
        };
        let k = self.agents.len();
        let s = self.pair_rng.random_range(0..k);
        let mut l = self.pair_rng.random_range(0..k - 1);
        if l >= s {
            l += 1;
        }
        let topic = self.topic_rng.random_range(0..scene.entities.len());

        let ctx_s =
            perceive_scene(&self.agents[s], &self.worlds[world_idx], &scene, &mut self.noise_rngs[s])?;
        let ctx_l =
            perceive_scene(&self.agents[l], &self.worlds[world_idx], &scene, &mut self.noise_rngs[l])?;

        let (used, invented, candidates) = if self.learning {
            let p = self.agents[s].produce(&ctx_s, topic, &self.params, &mut self.form_rngs[s])?;
            (Some(p.word), p.invented, p.candidates)
        } else {
            (self.agents[s].produce_read_only(&ctx_s, topic, &self.params), false, Vec::new())
        };
        let form: Option<WordForm> = used.map(|i| self.agents[s].word(i).form.clone());

        let pointing = form
            .as_ref()
            .and_then(|f| self.agents[l].interpret(f.as_str(), &ctx_l, &self.params));
        let success = pointing == Some(topic);

        // Counterfactual listener production, before any alignment touches
        // the listener. A silent speaker cannot be agreed with.
        let probe = self.agents[l]
            .produce_read_only(&ctx_l, topic, &self.params)
            .map(|i| self.agents[l].word(i).form.clone());
        let coherent = form.is_some() && probe == form;

        let mut adopted = false;
        if self.learning {
            let form = form.as_ref().expect("learning production always utters");
            let used = used.expect("learning production always utters");
            if success {
                self.agents[s].align_success(used, &candidates, &ctx_s, topic, &self.params)?;
                let l_used = self.agents[l].find(form.as_str()).expect("listener pointed");
                let l_cands: Vec<usize> = self.agents[l]
                    .candidate_words(&ctx_l, topic, &self.params)
                    .into_iter()
                    .map(|(i, _)| i)
                    .collect();
                self.agents[l].align_success(l_used, &l_cands, &ctx_l, topic, &self.params)?;
            } else {
                self.agents[s].punish_used(used, &self.params);
                if let Some(l_used) = self.agents[l].find(form.as_str()) {
                    // Wrong pointing: the reveal still teaches the listener
                    // what the word was meant for.
                    self.agents[l].punish_used(l_used, &self.params);
                    self.agents[l].repair_concept(l_used, &ctx_l, topic, &self.params);
                } else {
                    self.agents[l].adopt(form.clone(), &ctx_l[topic], &self.params)?;
                    adopted = true;
                }
            }
        }

        let record = GameRecord {
            game,
            speaker: s as u32,
            listener: l as u32,
            scene: scene.id,
            topic: topic as u32,
            utterance: form.as_ref().map(|f| f.as_str().into()),
            pointing: pointing.map(|p| p as u32),
            success,
            invented,
            adopted,
            coherent,
        };
        self.games_played = game;
        self.tracker.observe(
            record.speaker,
            record.utterance.as_deref(),
            record.success,
            Some(record.coherent),
        );
        sink(&record);
        self.fire_due()
    }

    fn fire_due(&mut self) -> Result<(), Error> {
        while let Some(event) = self.schedule.events().get(self.next_event) {
            if event.at > self.games_played {
                break;
            }
            let kind = event.kind.clone();
            self.next_event += 1;
            self.apply_event(kind)?;
        }
        Ok(())
    }

    fn apply_event(&mut self, kind: EventKind) -> Result<(), Error> {
        match kind {
            EventKind::SensorDefect { lose } => {
                for i in 0..self.agents.len() {
                    let n = self.agents[i].sensors().len();
                    if lose >= n {
                        return Err(Error::InvalidSchedule(
                            "defect would remove an agent's last sensor".into(),
                        ));
                    }
                    let picks = rand::seq::index::sample(&mut self.event_rngs[i], n, lose);
                    let lost: Vec<u16> =
                        picks.iter().map(|p| self.agents[i].sensors()[p]).collect();
                    self.agents[i].lose_sensors(&lost)?;
                }
            }
            EventKind::SwitchWorld { world } => self.active = world,
            EventKind::Freeze => self.learning = false,
            EventKind::Unfreeze => self.learning = true,
        }
        Ok(())
    }

    /// Frozen evaluation of the current population on any world, without
    /// touching agents, training streams, or metrics. Each call consumes one
    /// evaluation seed, so repeated calls probe with fresh scenes.
    pub fn evaluate(
        &mut self,
        world: usize,
        use_test_scenes: bool,
        games: u64,
        sink: impl FnMut(&GameRecord),
    ) -> Result<MetricsSummary, Error> {
        let seed = derive(self.master_seed, Stream::Eval(self.eval_count));
        self.eval_count += 1;
        evaluate(&self.params, &self.agents, &self.worlds[world], use_test_scenes, games, seed, sink)
    }
}

/// Plays `games` read-only games with a frozen population: no invention, no
/// adoption, no alignment. The speaker may have nothing discriminating to
/// say; such games fail. All randomness comes from `eval_seed`.
pub fn evaluate(
    params: &Params,
    agents: &[Agent],
    world: &WorldState,
    use_test_scenes: bool,
    games: u64,
    eval_seed: u64,
    mut sink: impl FnMut(&GameRecord),
) -> Result<MetricsSummary, Error> {
    if agents.len() < 2 {
        return Err(Error::InvalidSetup("need at least two agents".into()));
    }
    let scenes = if use_test_scenes { &world.test_scenes } else { &world.train_scenes };
    if scenes.is_empty() {
        return Err(Error::InvalidSetup("no scenes to evaluate on".into()));
    }
    let mut scene_rng = stream_rng(eval_seed, Stream::SceneDraw);
    let mut pair_rng = stream_rng(eval_seed, Stream::PairDraw);
    let mut topic_rng = stream_rng(eval_seed, Stream::TopicDraw);
    let mut noise_rngs: Vec<ChaCha8Rng> = (0..agents.len())
        .map(|i| stream_rng(eval_seed, Stream::Noise(i as u32)))
        .collect();
    let mut tracker = MetricsTracker::new(agents.len(), None);

    for game in 1..=games {
        let scene = &scenes[scene_rng.random_range(0..scenes.len())];
        let k = agents.len();
        let s = pair_rng.random_range(0..k);
        let mut l = pair_rng.random_range(0..k - 1);
        if l >= s {
            l += 1;
        }
        let topic = topic_rng.random_range(0..scene.entities.len());
        let ctx_s = perceive_scene(&agents[s], world, scene, &mut noise_rngs[s])?;
        let ctx_l = perceive_scene(&agents[l], world, scene, &mut noise_rngs[l])?;

        let used = agents[s].produce_read_only(&ctx_s, topic, params);
        let form = used.map(|i| agents[s].word(i).form.clone());
        let pointing =
            form.as_ref().and_then(|f| agents[l].interpret(f.as_str(), &ctx_l, params));
        let success = pointing == Some(topic);
        let probe = agents[l]
            .produce_read_only(&ctx_l, topic, params)
            .map(|i| agents[l].word(i).form.clone());
        let coherent = form.is_some() && probe == form;

        let record = GameRecord {
            game,
            speaker: s as u32,
            listener: l as u32,
            scene: scene.id,
            topic: topic as u32,
            utterance: form.as_ref().map(|f| f.as_str().into()),
            pointing: pointing.map(|p| p as u32),
            success,
            invented: false,
            adopted: false,
            coherent,
        };
        tracker.observe(record.speaker, record.utterance.as_deref(), record.success, Some(coherent));
        sink(&record);
    }
    Ok(tracker.summary())
}

fn perceive_scene(
    agent: &Agent,
    world: &WorldState,
    scene: &Scene,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<PerceivedVector>, Error> {
    scene
        .entities
        .iter()
        .map(|&eid| agent.perceive(&world.entities[eid as usize], rng))
        .collect()
}

/// Convenience for tests and callers assembling homogeneous populations:
/// `count` agents with identical sensors and exact perception.
pub fn uniform_population(count: usize, sensors: &[u16]) -> Vec<Agent> {
    (0..count)
        .map(|i| {
            Agent::new(i as u32, sensors.to_vec(), crate::world::PerceptionProfile::exact())
        })
        .collect()
}
