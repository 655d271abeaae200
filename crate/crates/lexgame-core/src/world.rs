//! Entities, scenes, and perception.
//!
//! An entity is a complete row of continuous features over the dataset's
//! channels. A scene is a small set of distinct entities put in front of
//! both agents. Perception is where agent individuality enters: each agent
//! sees an entity only through its own sensors, optionally displaced by a
//! per-agent constant shift per channel and by fresh Gaussian noise per
//! game. Perceived values are not clipped; learning must cope with whatever
//! the sensors report.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::channel::intersect_sorted;
use crate::error::Error;

/// One object: dense feature row keyed by sorted channel indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Entity {
    pub id: u32,
    features: Vec<(u16, f64)>,
}

impl Entity {
    pub fn new(id: u32, mut features: Vec<(u16, f64)>) -> Self {
        features.sort_unstable_by_key(|(ch, _)| *ch);
        debug_assert!(features.windows(2).all(|w| w[0].0 < w[1].0), "duplicate feature channel");
        Entity { id, features }
    }

    pub fn features(&self) -> &[(u16, f64)] {
        &self.features
    }

    pub fn channels(&self) -> impl Iterator<Item = u16> + '_ {
        self.features.iter().map(|(ch, _)| *ch)
    }

    fn get(&self, channel: u16) -> Option<f64> {
        self.features
            .binary_search_by_key(&channel, |(ch, _)| *ch)
            .ok()
            .map(|i| self.features[i].1)
    }
}

/// A set of distinct entities shown in one game, stored as sorted ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scene {
    pub id: u32,
    pub entities: Vec<u32>,
}

/// What an entity looks like to one agent in one game: the entity's values
/// on the channels the agent can sense, after shift and noise.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceivedVector {
    entries: Vec<(u16, f64)>,
}

impl PerceivedVector {
    pub fn from_entries(mut entries: Vec<(u16, f64)>) -> Self {
        entries.sort_unstable_by_key(|(ch, _)| *ch);
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0), "duplicate channel");
        PerceivedVector { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, channel: u16) -> Option<f64> {
        self.entries
            .binary_search_by_key(&channel, |(ch, _)| *ch)
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u16, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn channels(&self) -> impl Iterator<Item = u16> + '_ {
        self.entries.iter().map(|(ch, _)| *ch)
    }
}

/// Per-agent sensor distortion: a fixed offset per channel (drawn once at
/// population build time) plus i.i.d. Gaussian noise per perception.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceptionProfile {
    shift: Vec<(u16, f64)>,
    pub noise_std: f64,
}

impl PerceptionProfile {
    pub fn exact() -> Self {
        PerceptionProfile { shift: Vec::new(), noise_std: 0.0 }
    }

    pub fn new(mut shift: Vec<(u16, f64)>, noise_std: f64) -> Self {
        debug_assert!(noise_std >= 0.0);
        shift.sort_unstable_by_key(|(ch, _)| *ch);
        debug_assert!(shift.windows(2).all(|w| w[0].0 < w[1].0), "duplicate shift channel");
        PerceptionProfile { shift, noise_std }
    }

    pub fn shift(&self) -> &[(u16, f64)] {
        &self.shift
    }

    fn shift_for(&self, channel: u16) -> f64 {
        self.shift
            .binary_search_by_key(&channel, |(ch, _)| *ch)
            .map(|i| self.shift[i].1)
            .unwrap_or(0.0)
    }

    /// Drops shift entries for channels no longer sensed.
    pub(crate) fn retain_channels(&mut self, sensors: &[u16]) {
        self.shift.retain(|(ch, _)| sensors.binary_search(ch).is_ok());
    }

    /// Runs the entity through this profile on the given sensors. Noise is
    /// drawn per sensed channel in ascending channel order, one value per
    /// call, so perception consumes a predictable slice of the noise stream.
    pub fn perceive<R: Rng>(
        &self,
        agent_id: u32,
        sensors: &[u16],
        entity: &Entity,
        rng: &mut R,
    ) -> Result<PerceivedVector, Error> {
        let channels = intersect_sorted(sensors, &entity.channels().collect::<Vec<_>>());
        if channels.is_empty() {
            return Err(Error::ImperceptibleEntity { agent: agent_id, entity: entity.id });
        }
        let noise = (self.noise_std > 0.0)
            .then(|| Normal::new(0.0, self.noise_std).expect("finite positive noise std"));
        let entries = channels
            .into_iter()
            .map(|ch| {
                let base = entity.get(ch).expect("intersected channel");
                let n = noise.as_ref().map_or(0.0, |d| d.sample(rng));
                (ch, base + self.shift_for(ch) + n)
            })
            .collect();
        Ok(PerceivedVector { entries })
    }
}

/// Shuffles entity ids and cuts them into train/test halves. The cut point
/// is `round(n * train_fraction)` clamped so both halves stay non-empty.
pub fn split_entities<R: Rng>(
    ids: &[u32],
    train_fraction: f64,
    rng: &mut R,
) -> Result<(Vec<u32>, Vec<u32>), Error> {
    if ids.len() < 2 {
        return Err(Error::InvalidSetup("need at least two entities to split".into()));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidSetup("train fraction must lie strictly in (0, 1)".into()));
    }
    let mut pool: Vec<u32> = ids.to_vec();
    use rand::seq::SliceRandom;
    pool.shuffle(rng);
    let cut = (crate::math::round(ids.len() as f64 * train_fraction) as usize)
        .clamp(1, ids.len() - 1);
    let mut train = pool[..cut].to_vec();
    let mut test = pool[cut..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Builds `count` distinct scenes over the given entity pool. Each scene
/// samples its size uniformly from `min_size..=max_size`, then samples that
/// many distinct entities without replacement. Scenes are deduplicated as
/// sets; if the pool cannot yield enough distinct scenes within a bounded
/// number of attempts, construction fails rather than looping forever.
pub fn build_scenes<R: Rng>(
    entity_ids: &[u32],
    count: usize,
    min_size: usize,
    max_size: usize,
    first_scene_id: u32,
    rng: &mut R,
) -> Result<Vec<Scene>, Error> {
    if min_size < 2 || min_size > max_size {
        return Err(Error::InvalidSetup("scene sizes must satisfy 2 <= min <= max".into()));
    }
    if max_size > entity_ids.len() {
        return Err(Error::InvalidSetup("scene size exceeds entity pool".into()));
    }
    let mut seen = alloc::collections::BTreeSet::new();
    let mut scenes = Vec::with_capacity(count);
    let max_attempts = count.saturating_mul(50).max(1000);
    let mut attempts = 0;
    while scenes.len() < count {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::SceneSpaceExhausted { requested: count, built: scenes.len() });
        }
        let size = rng.random_range(min_size..=max_size);
        let mut members: Vec<u32> = rand::seq::index::sample(rng, entity_ids.len(), size)
            .into_iter()
            .map(|i| entity_ids[i])
            .collect();
        members.sort_unstable();
        if seen.insert(members.clone()) {
            scenes.push(Scene { id: first_scene_id + scenes.len() as u32, entities: members });
        }
    }
    Ok(scenes)
}

/// Min-max normalizes each column of a rectangular row-major table in place
/// and returns the per-column (min, max) pairs. Constant columns map to 0.
pub fn normalize_columns(rows: &mut [Vec<f64>]) -> Vec<(f64, f64)> {
    let Some(first) = rows.first() else { return Vec::new() };
    let width = first.len();
    let mut ranges = Vec::with_capacity(width);
    for j in 0..width {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in rows.iter() {
            lo = lo.min(row[j]);
            hi = hi.max(row[j]);
        }
        ranges.push((lo, hi));
        for row in rows.iter_mut() {
            row[j] = if hi > lo { (row[j] - lo) / (hi - lo) } else { 0.0 };
        }
    }
    ranges
}

/// Recipe for a synthetic clustered dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub clusters: usize,
    pub entities_per_cluster: usize,
    /// Channel indices of the generated features.
    pub channels: Vec<u16>,
    /// Within-cluster standard deviation.
    pub sigma: f64,
    /// Cluster means are drawn uniformly from this closed interval.
    pub mean_range: (f64, f64),
}

/// Draws cluster means, then entities around them, clipped to [0, 1].
/// Returns the entities (ids 0..n in cluster order) and, for diagnostics
/// only, each entity's cluster label; agents never see labels.
pub fn generate_synthetic<R: Rng>(spec: &SyntheticSpec, rng: &mut R) -> (Vec<Entity>, Vec<u32>) {
    let mut channels = spec.channels.clone();
    channels.sort_unstable();
    channels.dedup();
    let (lo, hi) = spec.mean_range;
    let centers: Vec<Vec<f64>> = (0..spec.clusters)
        .map(|_| channels.iter().map(|_| rng.random_range(lo..=hi)).collect())
        .collect();
    let jitter = Normal::new(0.0, spec.sigma).expect("finite positive sigma");
    let mut entities = Vec::with_capacity(spec.clusters * spec.entities_per_cluster);
    let mut labels = Vec::with_capacity(entities.capacity());
    for (label, center) in centers.iter().enumerate() {
        for _ in 0..spec.entities_per_cluster {
            let features = channels
                .iter()
                .zip(center)
                .map(|(&ch, &mu)| (ch, (mu + jitter.sample(rng)).clamp(0.0, 1.0)))
                .collect();
            entities.push(Entity::new(entities.len() as u32, features));
            labels.push(label as u32);
        }
    }
    (entities, labels)
}
