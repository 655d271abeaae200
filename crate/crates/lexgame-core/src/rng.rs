//! Seed derivation.
//!
//! Every source of randomness in a run is its own ChaCha8 stream, keyed by a
//! (tag, index) pair mixed into the master seed with splitmix64-style
//! finalizers. Purpose-split streams keep sampling decisions independent:
//! adding an extra noise draw for one agent cannot shift scene selection,
//! and a frozen evaluation can run mid-experiment without disturbing the
//! training trajectory.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 output finalizer. Bijective on u64, good avalanche.
#[inline]
pub fn mix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// A named random stream within one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Master seed of repetition `i` in a multi-run experiment.
    Run(u32),
    /// Train/test entity split of dataset `i`.
    Split(u32),
    /// Synthetic entity generation for dataset `i`.
    Synthetic(u32),
    /// Scene construction for dataset `i`; `test` selects the held-out half.
    Scenes { dataset: u32, test: bool },
    /// Sensor endowment of agent `i` (random-subset populations).
    Endowment(u32),
    /// Perception shift offsets of agent `i`.
    Shift(u32),
    /// Scene selection during training.
    SceneDraw,
    /// Speaker/listener selection during training.
    PairDraw,
    /// Topic selection during training.
    TopicDraw,
    /// Perception noise of agent `i`.
    Noise(u32),
    /// Word-form invention of agent `i`.
    Forms(u32),
    /// Scheduled-event draws affecting agent `i` (e.g. which sensors fail).
    Events(u32),
    /// Master seed of frozen evaluation `i`.
    Eval(u32),
}

impl Stream {
    fn key(self) -> (u64, u64) {
        match self {
            Stream::Run(i) => (1, i as u64),
            Stream::Split(i) => (2, i as u64),
            Stream::Synthetic(i) => (3, i as u64),
            Stream::Scenes { dataset, test } => (4, (dataset as u64) << 1 | test as u64),
            Stream::Endowment(i) => (5, i as u64),
            Stream::Shift(i) => (6, i as u64),
            Stream::SceneDraw => (7, 0),
            Stream::PairDraw => (8, 0),
            Stream::TopicDraw => (9, 0),
            Stream::Noise(i) => (10, i as u64),
            Stream::Forms(i) => (11, i as u64),
            Stream::Events(i) => (12, i as u64),
            Stream::Eval(i) => (13, i as u64),
        }
    }
}

/// Derives the sub-seed of `stream` under `master`.
pub fn derive(master: u64, stream: Stream) -> u64 {
    let (tag, index) = stream.key();
    mix(mix(master ^ mix(tag)) ^ mix(index))
}

/// A fresh generator for `stream` under `master`.
pub fn stream_rng(master: u64, stream: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, stream))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;
    use alloc::vec::Vec;
    use rand::Rng;

    #[test]
    fn streams_are_distinct_and_stable() {
        let master = 42;
        let streams = [
            Stream::Run(0),
            Stream::Run(1),
            Stream::Split(0),
            Stream::Synthetic(0),
            Stream::Scenes { dataset: 0, test: false },
            Stream::Scenes { dataset: 0, test: true },
            Stream::Endowment(0),
            Stream::Shift(0),
            Stream::SceneDraw,
            Stream::PairDraw,
            Stream::TopicDraw,
            Stream::Noise(0),
            Stream::Noise(1),
            Stream::Forms(0),
            Stream::Events(0),
            Stream::Eval(0),
        ];
        let seeds: Vec<u64> = streams.iter().map(|s| derive(master, *s)).collect();
        let unique: BTreeSet<u64> = seeds.iter().copied().collect();
        assert_eq!(unique.len(), seeds.len(), "stream seeds collide: {seeds:?}");
        // Re-derivation is pure.
        assert_eq!(derive(master, Stream::PairDraw), derive(master, Stream::PairDraw));
        assert_ne!(derive(master, Stream::PairDraw), derive(master + 1, Stream::PairDraw));
    }

    #[test]
    fn stream_rng_is_reproducible() {
        let mut a = stream_rng(7, Stream::TopicDraw);
        let mut b = stream_rng(7, Stream::TopicDraw);
        for _ in 0..32 {
            assert_eq!(a.random::<u64>(), b.random::<u64>());
        }
    }
}
