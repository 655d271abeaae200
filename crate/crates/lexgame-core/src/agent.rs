//! Agents: a sensor set, a perception profile, and a word inventory.
//!
//! All word-level behavior lives here. Production picks the known word
//! whose score-weighted discriminative power over the current context is
//! highest, inventing a fresh word when nothing discriminates. Interpretation
//! points at the context entity most similar to the named word's concept.
//! Alignment nudges scores, concept statistics, and channel weights after
//! the outcome is known: the game protocol itself stays in `game`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::concept::Concept;
use crate::error::Error;
use crate::params::Params;
use crate::world::{Entity, PerceivedVector, PerceptionProfile};

/// Phonotactic alphabet for invented forms: three CV syllables, e.g.
/// "demoxu". 75^3 possible forms keeps accidental cross-agent homonymy
/// negligible at realistic inventory sizes.
const CONSONANTS: &[u8] = b"bdfgklmnprstvxz";
const VOWELS: &[u8] = b"aeiou";

/// An uttered word form. Pure label: all meaning sits in per-agent concepts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WordForm(String);

impl WordForm {
    pub fn new(s: impl Into<String>) -> Self {
        WordForm(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Draws a random three-syllable form.
    pub fn sample<R: Rng>(rng: &mut R) -> Self {
        let mut s = String::with_capacity(6);
        for _ in 0..3 {
            s.push(CONSONANTS[rng.random_range(0..CONSONANTS.len())] as char);
            s.push(VOWELS[rng.random_range(0..VOWELS.len())] as char);
        }
        WordForm(s)
    }
}

impl fmt::Display for WordForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A form paired with this agent's private concept for it and a usage score
/// in [0, 1] tracking how well the pairing has served communication.
#[derive(Debug, Clone, PartialEq)]
pub struct Word {
    pub form: WordForm,
    pub concept: Concept,
    pub score: f64,
}

/// What production decided for one game.
#[derive(Debug, Clone, PartialEq)]
pub struct Production {
    /// Inventory index of the uttered word.
    pub word: usize,
    /// True when no existing word discriminated and one was invented.
    pub invented: bool,
    /// Inventory indices that had positive discriminative power (empty on
    /// invention). These are the lateral-inhibition competitors.
    pub candidates: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub id: u32,
    sensors: Vec<u16>,
    perception: PerceptionProfile,
    inventory: Vec<Word>,
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

impl Agent {
    pub fn new(id: u32, mut sensors: Vec<u16>, perception: PerceptionProfile) -> Self {
        sensors.sort_unstable();
        sensors.dedup();
        Agent { id, sensors, perception, inventory: Vec::new() }
    }

    /// Restores an agent from checkpointed parts. Forms must be distinct.
    pub fn from_parts(
        id: u32,
        sensors: Vec<u16>,
        perception: PerceptionProfile,
        inventory: Vec<Word>,
    ) -> Result<Self, Error> {
        let mut agent = Agent::new(id, sensors, perception);
        for word in &inventory {
            if agent.knows(word.form.as_str()) {
                return Err(Error::DuplicateForm(word.form.as_str().into()));
            }
            agent.inventory.push(word.clone());
        }
        Ok(agent)
    }

    pub fn sensors(&self) -> &[u16] {
        &self.sensors
    }

    pub fn perception(&self) -> &PerceptionProfile {
        &self.perception
    }

    pub fn inventory(&self) -> &[Word] {
        &self.inventory
    }

    pub fn word(&self, index: usize) -> &Word {
        &self.inventory[index]
    }

    pub fn find(&self, form: &str) -> Option<usize> {
        self.inventory.iter().position(|w| w.form.as_str() == form)
    }

    pub fn knows(&self, form: &str) -> bool {
        self.find(form).is_some()
    }

    /// Runs an entity through this agent's sensors and distortions.
    pub fn perceive<R: Rng>(&self, entity: &Entity, rng: &mut R) -> Result<PerceivedVector, Error> {
        self.perception.perceive(self.id, &self.sensors, entity, rng)
    }

    /// Words whose concept discriminates the topic in this context
    /// (discriminative power strictly positive), with their powers. Words
    /// incomparable with the topic simply do not qualify.
    pub fn candidate_words(
        &self,
        context: &[PerceivedVector],
        topic: usize,
        params: &Params,
    ) -> Vec<(usize, f64)> {
        self.inventory
            .iter()
            .enumerate()
            .filter_map(|(i, w)| {
                match w.concept.discriminative_power(context, topic, params) {
                    Ok(dp) if dp > 0.0 => Some((i, dp)),
                    _ => None,
                }
            })
            .collect()
    }

    fn best_candidate(&self, candidates: &[(usize, f64)]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for &(i, dp) in candidates {
            let rank = self.inventory[i].score * dp;
            // Strict comparison keeps the lowest index on ties.
            if best.map_or(true, |(_, r)| rank > r) {
                best = Some((i, rank));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Speaker production. Ranks candidates by score times discriminative
    /// power; invents a fresh word seeded on the topic when no known word
    /// discriminates at all.
    pub fn produce<R: Rng>(
        &mut self,
        context: &[PerceivedVector],
        topic: usize,
        params: &Params,
        forms_rng: &mut R,
    ) -> Result<Production, Error> {
        let scored = self.candidate_words(context, topic, params);
        if let Some(best) = self.best_candidate(&scored) {
            let candidates = scored.iter().map(|&(i, _)| i).collect();
            return Ok(Production { word: best, invented: false, candidates });
        }
        let word = self.invent(&context[topic], params, forms_rng)?;
        Ok(Production { word, invented: true, candidates: Vec::new() })
    }

    /// Production without side effects: no invention, no learning. Used for
    /// coherence probes and frozen evaluation.
    pub fn produce_read_only(
        &self,
        context: &[PerceivedVector],
        topic: usize,
        params: &Params,
    ) -> Option<usize> {
        self.best_candidate(&self.candidate_words(context, topic, params))
    }

    fn invent<R: Rng>(
        &mut self,
        topic: &PerceivedVector,
        params: &Params,
        rng: &mut R,
    ) -> Result<usize, Error> {
        let mut form = WordForm::sample(rng);
        let mut attempts = 0;
        while self.knows(form.as_str()) {
            attempts += 1;
            if attempts > 10_000 {
                return Err(Error::DuplicateForm(form.as_str().into()));
            }
            form = WordForm::sample(rng);
        }
        self.inventory.push(Word {
            form,
            concept: Concept::from_observation(topic, params),
            score: params.initial_score,
        });
        Ok(self.inventory.len() - 1)
    }

    /// Listener interpretation: the context entity most similar to the
    /// form's concept, ties to the lowest index. `None` when the form is
    /// unknown or no context entity is comparable with the concept.
    pub fn interpret(
        &self,
        form: &str,
        context: &[PerceivedVector],
        params: &Params,
    ) -> Option<usize> {
        let word = &self.inventory[self.find(form)?];
        let mut best: Option<(usize, f64)> = None;
        for (i, v) in context.iter().enumerate() {
            if let Ok(sim) = word.concept.entity_similarity(v, params) {
                if best.map_or(true, |(_, s)| sim > s) {
                    best = Some((i, sim));
                }
            }
        }
        best.map(|(i, _)| i)
    }

    /// Hears an unknown form used for a topic: stores it with a concept
    /// seeded on the topic as this agent perceived it.
    pub fn adopt(
        &mut self,
        form: WordForm,
        topic: &PerceivedVector,
        params: &Params,
    ) -> Result<usize, Error> {
        if self.knows(form.as_str()) {
            return Err(Error::DuplicateForm(form.as_str().into()));
        }
        self.inventory.push(Word {
            form,
            concept: Concept::from_observation(topic, params),
            score: params.initial_score,
        });
        Ok(self.inventory.len() - 1)
    }

    /// Success-side alignment for either role: reward the used word,
    /// laterally inhibit the competing candidates in proportion to their
    /// conceptual similarity to the used word (computed before any concept
    /// moves), then absorb the topic into the used word's concept and shift
    /// its channel weights toward the best discriminating subset.
    pub fn align_success(
        &mut self,
        used: usize,
        candidates: &[usize],
        context: &[PerceivedVector],
        topic: usize,
        params: &Params,
    ) -> Result<(), Error> {
        self.inventory[used].score = clamp01(self.inventory[used].score + params.score_reward);
        let used_concept = self.inventory[used].concept.clone();
        for &i in candidates {
            if i == used {
                continue;
            }
            // Disjoint concepts cannot compete; similarity counts as zero.
            let sim = self.inventory[i]
                .concept
                .concept_similarity(&used_concept, params)
                .unwrap_or(0.0);
            let w = &mut self.inventory[i];
            w.score = clamp01(w.score + params.inhibition_scale * sim);
        }
        self.inventory[used].concept.reinforce(context, topic, params)
    }

    /// Punishes the used word's score after a failed game.
    pub fn punish_used(&mut self, used: usize, params: &Params) {
        self.inventory[used].score = clamp01(self.inventory[used].score + params.score_punishment);
    }

    /// Failure-side concept repair for a listener that pointed wrong: the
    /// feedback reveals the intended topic, so the concept still absorbs it.
    /// A concept sharing no channel with the topic has nothing to absorb.
    pub fn repair_concept(
        &mut self,
        used: usize,
        context: &[PerceivedVector],
        topic: usize,
        params: &Params,
    ) {
        match self.inventory[used].concept.reinforce(context, topic, params) {
            Ok(()) | Err(Error::IncomparableChannels) => {}
            Err(e) => unreachable!("concept repair cannot fail otherwise: {e:?}"),
        }
    }

    /// Permanently removes sensors (hardware defect experiments). Concepts
    /// and inventory are untouched; dropped channels simply stop being
    /// perceived. At least one sensor must survive.
    pub fn lose_sensors(&mut self, lost: &[u16]) -> Result<(), Error> {
        for ch in lost {
            if self.sensors.binary_search(ch).is_err() {
                return Err(Error::UnknownSensor(*ch));
            }
        }
        let mut lost_sorted: Vec<u16> = lost.to_vec();
        lost_sorted.sort_unstable();
        lost_sorted.dedup();
        if lost_sorted.len() >= self.sensors.len() {
            return Err(Error::InvalidSetup("an agent must keep at least one sensor".into()));
        }
        self.sensors.retain(|ch| lost_sorted.binary_search(ch).is_err());
        self.perception.retain_channels(&self.sensors);
        Ok(())
    }
}
