//! Engine for emergent-lexicon simulations.
//!
//! A population of agents plays pairwise referential games over scenes of
//! continuous-feature entities. Each game, a speaker picks a word for a topic
//! entity, the listener points at the entity it believes is meant, and both
//! sides adjust word scores, concept statistics, and per-channel attention
//! weights from the outcome alone. No agent ever inspects another agent's
//! state; coordination happens purely through the game protocol.
//!
//! The crate is deliberately IO-free and `no_std`-compatible (with `alloc`)
//! so the same engine can be embedded, fuzzed, or driven from the companion
//! CLI crate. All randomness flows through seeded, purpose-split streams, so
//! a run is reproducible bit for bit from its master seed.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod agent;
pub mod channel;
pub mod concept;
pub mod error;
pub mod game;
pub mod metrics;
pub mod params;
pub mod rng;
pub mod world;

mod math;

pub use agent::{Agent, Production, Word, WordForm};
pub use channel::ChannelTable;
pub use concept::{ChannelStat, Concept};
pub use error::Error;
pub use game::{Engine, EventKind, GameRecord, Schedule, ScheduledEvent, WorldState};
pub use metrics::{MetricsSummary, MetricsTracker, SeriesRow};
pub use params::Params;
pub use world::{Entity, PerceivedVector, PerceptionProfile, Scene};
