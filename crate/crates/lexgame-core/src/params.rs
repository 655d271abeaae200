//! Learning parameters.

use serde::{Deserialize, Serialize};

/// All tunable constants of the learning dynamics, bundled so they can be
/// threaded through produce/interpret/align without global state.
///
/// The defaults are the reference configuration used by the baseline
/// experiments; every robustness variant in the companion CLI starts from
/// these and overrides individual fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Score of a freshly invented or adopted word.
    pub initial_score: f64,
    /// Added to the used word's score on a communicative success.
    pub score_reward: f64,
    /// Added to the used word's score on a failure.
    pub score_punishment: f64,
    /// Scale of lateral inhibition: competing candidates lose
    /// `inhibition_scale * concept_similarity` on a success.
    pub inhibition_scale: f64,
    /// Standard deviation a concept channel starts from (count = 1).
    pub initial_sigma: f64,
    /// Lower bound on a channel's standard deviation when evaluating
    /// similarities, so a channel that has seen near-identical values
    /// cannot collapse into a delta spike.
    pub sigma_floor: f64,
    /// Initial channel weight, expressed in weight space (not logit space).
    pub initial_weight: f64,
    /// Logit step applied to channels inside the best discriminating subset.
    pub weight_reward: f64,
    /// Logit step applied to shared channels outside that subset.
    pub weight_punishment: f64,
    /// Optional cap on the subset size enumerated by the channel search;
    /// `None` enumerates all non-empty subsets of the shared channels.
    pub max_subset_channels: Option<usize>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            initial_score: 0.5,
            score_reward: 0.1,
            score_punishment: -0.1,
            inhibition_scale: -0.02,
            initial_sigma: 0.01,
            sigma_floor: 1e-4,
            initial_weight: 0.5,
            weight_reward: 1.0,
            weight_punishment: -5.0,
            max_subset_channels: None,
        }
    }
}
