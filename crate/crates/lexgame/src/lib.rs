//! Experiment front end for the lexicon-game engine: configuration files,
//! dataset loading, presets for the standard experiment families, run
//! orchestration with repetitions, and the on-disk formats (game records,
//! metric series, population checkpoints, scene files).

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod presets;
pub mod report;
pub mod runner;
