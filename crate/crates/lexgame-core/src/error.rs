//! Error type shared across the engine.

use alloc::string::String;
use core::fmt;

/// Everything that can go wrong inside the engine proper.
///
/// Violations of game-protocol preconditions (an unknown word form reaching
/// alignment, a duplicate form entering an inventory) are reported rather
/// than panicking so that callers driving long experiments can surface a
/// broken configuration instead of aborting mid-run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Two channel sets share no member where an overlap is required.
    IncomparableChannels,
    /// An agent's sensors do not overlap an entity's feature channels at all.
    ImperceptibleEntity { agent: u32, entity: u32 },
    /// A word form was about to be inserted twice into one inventory.
    DuplicateForm(String),
    /// A word form was expected in an inventory but is absent.
    UnknownForm(String),
    /// A sensor index is not part of the agent's current sensor set.
    UnknownSensor(u16),
    /// A channel name is not registered in the channel table.
    UnknownChannel(String),
    /// Scene construction cannot satisfy the request (too few entities, or
    /// the deduplicated scene space is smaller than the number asked for).
    SceneSpaceExhausted { requested: usize, built: usize },
    /// An event schedule is malformed (out of range or not strictly ordered).
    InvalidSchedule(String),
    /// An experiment was assembled from inconsistent parts.
    InvalidSetup(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::IncomparableChannels => write!(f, "channel sets do not overlap"),
            Error::ImperceptibleEntity { agent, entity } => {
                write!(f, "agent {agent} cannot perceive entity {entity} on any channel")
            }
            Error::DuplicateForm(form) => write!(f, "word form {form:?} already in inventory"),
            Error::UnknownForm(form) => write!(f, "word form {form:?} not in inventory"),
            Error::UnknownSensor(ch) => write!(f, "channel {ch} is not among the agent's sensors"),
            Error::UnknownChannel(name) => write!(f, "channel name {name:?} is not registered"),
            Error::SceneSpaceExhausted { requested, built } => {
                write!(f, "requested {requested} distinct scenes, only {built} constructible")
            }
            Error::InvalidSchedule(why) => write!(f, "invalid event schedule: {why}"),
            Error::InvalidSetup(why) => write!(f, "invalid experiment setup: {why}"),
        }
    }
}

impl core::error::Error for Error {}
