//! Concepts: per-channel Gaussian beliefs plus attention weights.
//!
//! A concept models "the kind of thing this word refers to" as one running
//! Gaussian per feature channel together with a weight saying how much that
//! channel matters for this word. Distributions are maintained with
//! Welford's algorithm; weights live in logit space and move by fixed
//! increments through a sigmoid, so they saturate smoothly instead of
//! running away.
//!
//! Two similarities drive everything:
//!
//! * concept vs. perceived entity: weighted mean of `exp(-|x - mu| / sigma)`
//!   over the channels both sides share, weights renormalized over that
//!   intersection. An entity is never penalized for channels it does not
//!   carry; agents with different sensors stay mutually intelligible.
//! * concept vs. concept: per shared channel, Hellinger similarity of the
//!   two Gaussians, damped by how differently the two concepts attend to
//!   the channel, scaled by their mean attention. Here each side's weights
//!   are normalized over its own full channel set, so attention spent on
//!   unshared channels reduces the overlap.

use alloc::vec::Vec;

use crate::channel::intersect_sorted;
use crate::error::Error;
use crate::math::{abs, exp, sqrt};
use crate::params::Params;
use crate::world::PerceivedVector;

/// Weight logits are clamped to this magnitude; the corresponding weights
/// stay strictly inside (0, 1) in f64, so weight sums never hit zero.
const LOGIT_LIMIT: f64 = 70.0;

/// Logistic squash used for channel weights: `1 / (1 + e^(-x/2))`.
pub fn weight_from_logit(logit: f64) -> f64 {
    1.0 / (1.0 + exp(-logit / 2.0))
}

/// Inverse of [`weight_from_logit`]; `w` must lie strictly in (0, 1).
pub fn logit_from_weight(w: f64) -> f64 {
    debug_assert!(w > 0.0 && w < 1.0);
    2.0 * libm::log(w / (1.0 - w))
}

/// Running Gaussian and attention weight of one concept channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStat {
    pub mean: f64,
    /// Sum of squared deviations (Welford's M2).
    pub m2: f64,
    pub count: u64,
    pub weight_logit: f64,
}

impl ChannelStat {
    /// Stat for a single observation `x`: the distribution starts as a
    /// count-1 Gaussian centered on `x` with spread `initial_sigma`.
    pub fn from_observation(x: f64, params: &Params) -> Self {
        ChannelStat {
            mean: x,
            m2: params.initial_sigma * params.initial_sigma,
            count: 1,
            weight_logit: logit_from_weight(params.initial_weight),
        }
    }

    /// Welford update. Population variance: `m2 / count`.
    pub fn observe(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Population standard deviation.
    pub fn std(&self) -> f64 {
        sqrt(self.m2.max(0.0) / self.count as f64)
    }

    /// Standard deviation with the collapse floor applied.
    pub fn effective_std(&self, params: &Params) -> f64 {
        self.std().max(params.sigma_floor)
    }

    pub fn weight(&self) -> f64 {
        weight_from_logit(self.weight_logit)
    }

    pub fn shift_weight(&mut self, step: f64) {
        self.weight_logit = (self.weight_logit + step).clamp(-LOGIT_LIMIT, LOGIT_LIMIT);
    }

    /// `exp(-|x - mean| / sigma)` with the floored sigma.
    fn channel_similarity(&self, x: f64, params: &Params) -> f64 {
        exp(-abs(x - self.mean) / self.effective_std(params))
    }
}

/// Hellinger-based similarity between two univariate Gaussians: 1 - H where
/// H^2 = 1 - BC and BC is the Bhattacharyya coefficient. Equals 1 for
/// identical distributions and falls toward 0 as they separate.
pub fn hellinger_similarity(mean_a: f64, sigma_a: f64, mean_b: f64, sigma_b: f64) -> f64 {
    debug_assert!(sigma_a > 0.0 && sigma_b > 0.0);
    let var_sum = sigma_a * sigma_a + sigma_b * sigma_b;
    let dm = mean_a - mean_b;
    let bc = sqrt(2.0 * sigma_a * sigma_b / var_sum) * exp(-dm * dm / (4.0 * var_sum));
    1.0 - sqrt((1.0 - bc).max(0.0))
}

/// A word's meaning: sorted channel list with per-channel stats.
///
/// The channel set is fixed at creation (sensors intersected with the first
/// observed entity); later learning only reshapes distributions and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Concept {
    entries: Vec<(u16, ChannelStat)>,
}

impl Concept {
    /// Concept seeded from one perceived entity, one channel per perceived
    /// feature. This is what invention and adoption build.
    pub fn from_observation(v: &PerceivedVector, params: &Params) -> Self {
        let entries = v
            .iter()
            .map(|(ch, x)| (ch, ChannelStat::from_observation(x, params)))
            .collect();
        Concept { entries }
    }

    /// Rebuilds a concept from raw entries (checkpoint restore). Entries are
    /// sorted by channel; duplicate channels are rejected.
    pub fn from_entries(mut entries: Vec<(u16, ChannelStat)>) -> Result<Self, Error> {
        entries.sort_unstable_by_key(|(ch, _)| *ch);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidSetup("duplicate channel in concept".into()));
        }
        Ok(Concept { entries })
    }

    pub fn entries(&self) -> &[(u16, ChannelStat)] {
        &self.entries
    }

    pub fn channels(&self) -> impl Iterator<Item = u16> + '_ {
        self.entries.iter().map(|(ch, _)| *ch)
    }

    pub fn stat(&self, channel: u16) -> Option<&ChannelStat> {
        self.entries
            .binary_search_by_key(&channel, |(ch, _)| *ch)
            .ok()
            .map(|i| &self.entries[i].1)
    }

    fn stat_mut(&mut self, channel: u16) -> Option<&mut ChannelStat> {
        self.entries
            .binary_search_by_key(&channel, |(ch, _)| *ch)
            .ok()
            .map(move |i| &mut self.entries[i].1)
    }

    /// Weighted similarity to a perceived entity over the shared channels,
    /// weights renormalized over the intersection. Errors when the concept
    /// and the vector share no channel at all.
    pub fn entity_similarity(&self, v: &PerceivedVector, params: &Params) -> Result<f64, Error> {
        let mut weight_sum = 0.0;
        let mut acc = 0.0;
        let mut overlap = false;
        let mut values = v.iter().peekable();
        for (ch, stat) in &self.entries {
            while let Some(&(vch, _)) = values.peek() {
                if vch < *ch {
                    values.next();
                } else {
                    break;
                }
            }
            if let Some(&(vch, x)) = values.peek() {
                if vch == *ch {
                    let w = stat.weight();
                    weight_sum += w;
                    acc += w * stat.channel_similarity(x, params);
                    overlap = true;
                }
            }
        }
        if !overlap {
            return Err(Error::IncomparableChannels);
        }
        Ok(acc / weight_sum)
    }

    /// Similarity to another concept over their shared channels. Each side's
    /// weights are normalized over its own full channel set, so the result
    /// reflects both distributional overlap and agreement about which
    /// channels matter. Errors when no channel is shared.
    pub fn concept_similarity(&self, other: &Concept, params: &Params) -> Result<f64, Error> {
        let total_self: f64 = self.entries.iter().map(|(_, s)| s.weight()).sum();
        let total_other: f64 = other.entries.iter().map(|(_, s)| s.weight()).sum();
        let mut acc = 0.0;
        let mut overlap = false;
        for (ch, sq) in &self.entries {
            let Some(sr) = other.stat(*ch) else { continue };
            overlap = true;
            let nwq = sq.weight() / total_self;
            let nwr = sr.weight() / total_other;
            let hell = hellinger_similarity(
                sq.mean,
                sq.effective_std(params),
                sr.mean,
                sr.effective_std(params),
            );
            acc += hell * (1.0 - abs(nwq - nwr)) * ((nwq + nwr) / 2.0);
        }
        if !overlap {
            return Err(Error::IncomparableChannels);
        }
        Ok(acc)
    }

    /// How much better the concept matches the topic than the most
    /// confusable other entity in the context: `sim(topic) - max sim(other)`.
    /// Context entities the concept cannot be compared with at all are not
    /// confusable and drop out of the max. Errors when the topic itself is
    /// incomparable.
    pub fn discriminative_power(
        &self,
        context: &[PerceivedVector],
        topic: usize,
        params: &Params,
    ) -> Result<f64, Error> {
        let topic_sim = self.entity_similarity(&context[topic], params)?;
        let mut best_other = 0.0f64;
        for (i, v) in context.iter().enumerate() {
            if i == topic {
                continue;
            }
            if let Ok(sim) = self.entity_similarity(v, params) {
                best_other = best_other.max(sim);
            }
        }
        Ok(topic_sim - best_other)
    }

    /// Searches for the channel subset that best separates the topic from
    /// the rest of the context when attention is spread uniformly over the
    /// subset.
    ///
    /// Channels on which the topic strictly beats every other entity are
    /// forced into every candidate (they can only help); the search then
    /// enumerates all supersets within the shared channels, preferring
    /// higher discrimination, then fewer channels, then the lexicographically
    /// first channel list. If `max_subset_channels` is too small to hold all
    /// forced channels, the search falls back to plain bounded enumeration.
    pub fn best_channel_subset(
        &self,
        context: &[PerceivedVector],
        topic: usize,
        params: &Params,
    ) -> Result<Vec<u16>, Error> {
        let topic_v = &context[topic];
        let shared = intersect_sorted(
            &self.channels().collect::<Vec<_>>(),
            &topic_v.channels().collect::<Vec<_>>(),
        );
        if shared.is_empty() {
            return Err(Error::IncomparableChannels);
        }

        // Per-channel similarities: topic row and one row per other entity.
        // An entity missing a shared channel cannot be confused on it; its
        // similarity there counts as 0.
        let sims_for = |v: &PerceivedVector| -> Vec<f64> {
            shared
                .iter()
                .map(|&ch| {
                    let stat = self.stat(ch).expect("shared channel in concept");
                    v.get(ch).map_or(0.0, |x| stat.channel_similarity(x, params))
                })
                .collect()
        };
        let st = sims_for(topic_v);
        let se: Vec<Vec<f64>> = context
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != topic)
            .map(|(_, v)| sims_for(v))
            .collect();

        let positive: Vec<usize> = (0..shared.len())
            .filter(|&i| se.iter().all(|row| st[i] > row[i]))
            .collect();

        let cap = params.max_subset_channels.unwrap_or(shared.len()).max(1);
        let forced: &[usize] = if positive.len() > cap { &[] } else { &positive };
        let free: Vec<usize> = (0..shared.len()).filter(|i| !forced.contains(i)).collect();

        let mut search = SubsetSearch {
            st: &st,
            se: &se,
            shared: &shared,
            forced,
            free: &free,
            cap,
            sum_t: forced.iter().map(|&i| st[i]).sum(),
            sums_e: se.iter().map(|row| forced.iter().map(|&i| row[i]).sum()).collect(),
            picked: Vec::new(),
            best: None,
        };
        search.descend(0);
        let (_, _, channels) = search.best.expect("at least one subset evaluated");
        Ok(channels)
    }

    /// Success-side concept update: absorb the topic into the shared-channel
    /// distributions, then move attention toward the subset that best told
    /// the topic apart in this very context.
    pub fn reinforce(
        &mut self,
        context: &[PerceivedVector],
        topic: usize,
        params: &Params,
    ) -> Result<(), Error> {
        self.observe_topic(&context[topic]);
        let subset = self.best_channel_subset(context, topic, params)?;
        let shared: Vec<u16> = context[topic]
            .iter()
            .filter(|(ch, _)| self.stat(*ch).is_some())
            .map(|(ch, _)| ch)
            .collect();
        for ch in shared {
            let step = if subset.binary_search(&ch).is_ok() {
                params.weight_reward
            } else {
                params.weight_punishment
            };
            self.stat_mut(ch).expect("shared channel").shift_weight(step);
        }
        Ok(())
    }

    /// Welford-updates every concept channel the topic carries.
    pub fn observe_topic(&mut self, topic: &PerceivedVector) {
        for (ch, x) in topic.iter() {
            if let Some(stat) = self.stat_mut(ch) {
                stat.observe(x);
            }
        }
    }
}

/// Depth-first enumeration over free channels with forced prefix and size
/// cap, maintaining subset sums incrementally.
struct SubsetSearch<'a> {
    st: &'a [f64],
    se: &'a [Vec<f64>],
    shared: &'a [u16],
    forced: &'a [usize],
    free: &'a [usize],
    cap: usize,
    sum_t: f64,
    sums_e: Vec<f64>,
    picked: Vec<usize>,
    best: Option<(f64, usize, Vec<u16>)>,
}

impl SubsetSearch<'_> {
    fn descend(&mut self, depth: usize) {
        if depth == self.free.len() {
            self.evaluate();
            return;
        }
        self.descend(depth + 1);
        if self.forced.len() + self.picked.len() < self.cap {
            let pos = self.free[depth];
            self.picked.push(pos);
            self.sum_t += self.st[pos];
            for (sum, row) in self.sums_e.iter_mut().zip(self.se) {
                *sum += row[pos];
            }
            self.descend(depth + 1);
            self.picked.pop();
            self.sum_t -= self.st[pos];
            for (sum, row) in self.sums_e.iter_mut().zip(self.se) {
                *sum -= row[pos];
            }
        }
    }

    fn evaluate(&mut self) {
        let len = self.forced.len() + self.picked.len();
        if len == 0 {
            return;
        }
        let worst: f64 = self.sums_e.iter().fold(0.0, |a, &s| a.max(s));
        let dp = (self.sum_t - worst) / len as f64;
        let better = match &self.best {
            None => true,
            Some((bdp, blen, bchs)) => {
                dp > *bdp
                    || (dp == *bdp
                        && (len < *blen || (len == *blen && self.channel_list() < *bchs)))
            }
        };
        if better {
            self.best = Some((dp, len, self.channel_list()));
        }
    }

    /// Sorted channel list of the current subset (forced plus picked).
    fn channel_list(&self) -> Vec<u16> {
        let mut chs: Vec<u16> = self
            .forced
            .iter()
            .chain(self.picked.iter())
            .map(|&pos| self.shared[pos])
            .collect();
        chs.sort_unstable();
        chs
    }
}
