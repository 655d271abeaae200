//! Ready-made experiment configs.
//!
//! Each preset is a complete TOML config reproducing one published
//! condition: the three dataset baselines, CoGenT-style generalisation,
//! heteromorphic populations, mid-run sensor defects, miscalibrated or noisy
//! perception, and cross-dataset continual learning. They all run a
//! population of ten for a million training games (two million for the
//! continual condition) and finish with frozen evaluations of one hundred
//! thousand games on held-out scenes, repeated over ten independent seeds.
//!
//! CSV paths are relative to the working directory; drop the feature tables
//! under data/ or edit the emitted config. Desk-scale variants are easiest
//! made by shrinking games, scene counts, and repetitions.

pub const NAMES: [&str; 13] = [
    "baseline-clevr",
    "baseline-wine",
    "baseline-credit",
    "cogent",
    "hetero-19",
    "hetero-10",
    "defect-1",
    "defect-10",
    "shift-0.1",
    "shift-1",
    "noise-0.1",
    "noise-1",
    "continual",
];

pub fn toml_for(name: &str) -> Option<String> {
    let text = match name {
        "baseline-clevr" => clevr_preset(
            "CLEVR baseline: ten agents converge over the 20-channel object features.",
            "",
            "",
        ),
        "baseline-wine" => WINE.to_owned(),
        "baseline-credit" => CREDIT.to_owned(),
        "cogent" => COGENT.to_owned(),
        "hetero-19" => clevr_preset(
            "Heteromorphic population: every agent senses its own random 19 of 20 channels.",
            "sensors = { random = 19 }\n",
            "",
        ),
        "hetero-10" => clevr_preset(
            "Heteromorphic population: every agent senses its own random 10 of 20 channels.",
            "sensors = { random = 10 }\n",
            "",
        ),
        "defect-1" => clevr_preset(
            "Sensor defect: each agent loses 1 random sensor after 500,000 games.",
            "",
            "[[event]]\nat = 500000\nkind = { sensor_defect = { lose = 1 } }\n\n",
        ),
        "defect-10" => clevr_preset(
            "Sensor defect: each agent loses 10 random sensors after 500,000 games.",
            "",
            "[[event]]\nat = 500000\nkind = { sensor_defect = { lose = 10 } }\n\n",
        ),
        "shift-0.1" => clevr_preset(
            "Miscalibrated sensors: constant per-(agent, sensor) offsets ~ Normal(0, 0.1).",
            "shift_std = 0.1\n",
            "",
        ),
        "shift-1" => clevr_preset(
            "Miscalibrated sensors: constant per-(agent, sensor) offsets ~ Normal(0, 1).",
            "shift_std = 1.0\n",
            "",
        ),
        "noise-0.1" => clevr_preset(
            "Noisy observation: fresh Normal(0, 0.1) noise per sensed value per game.",
            "noise_std = 0.1\n",
            "",
        ),
        "noise-1" => clevr_preset(
            "Noisy observation: fresh Normal(0, 1) noise per sensed value per game.",
            "noise_std = 1.0\n",
            "",
        ),
        "continual" => CONTINUAL.to_owned(),
        _ => return None,
    };
    Some(text)
}

fn clevr_preset(title: &str, population_extra: &str, sections: &str) -> String {
    format!(
        r#"# {title}
#
# Expects data/clevr.csv: one row per object, header naming the 20 feature
# channels. The feature extraction itself is external; any 20-channel table
# works. Scenes are sampled here rather than taken from the image grouping.
seed = 42
games = 1000000
repetitions = 10

[population]
size = 10
{population_extra}
[[dataset]]
name = "clevr"
source = {{ csv = "data/clevr.csv" }}
expected_channels = 20
train_fraction = 0.9
train_scenes = 70000
test_scenes = 15000

{sections}[[evaluation]]
after = 1000000
world = "clevr"
scenes = "test"
games = 100000

[output]
records = false
"#
    )
}

const WINE: &str = r#"# WINE baseline: ten agents converge over the physicochemical channels of
# the white wine quality table (semicolon-delimited; the quality column is
# a label and gets dropped).
seed = 42
games = 1000000
repetitions = 10

[population]
size = 10

[[dataset]]
name = "wine"
source = { csv = "data/winequality-white.csv" }
delimiter = ";"
exclude_columns = ["quality"]
expected_channels = 11
train_fraction = 0.9
train_scenes = 20000
test_scenes = 1000

[[evaluation]]
after = 1000000
world = "wine"
scenes = "test"
games = 100000

[output]
records = false
"#;

const CREDIT: &str = r#"# CREDIT baseline: ten agents converge over the 28 PCA channels of the
# credit card transaction table. Time, Amount, and the fraud label are
# dropped. The 28 shared channels make the discriminating-subset search the
# cost center; if a run stalls, cap it with max_subset_channels under
# [params].
seed = 42
games = 1000000
repetitions = 10

[population]
size = 10

[[dataset]]
name = "credit"
source = { csv = "data/creditcard.csv" }
exclude_columns = ["Time", "Amount", "Class"]
expected_channels = 28
train_fraction = 0.9
train_scenes = 40000
test_scenes = 4000

[[evaluation]]
after = 1000000
world = "credit"
scenes = "test"
games = 100000

[output]
records = false
"#;

const COGENT: &str = r#"# CoGenT generalisation: train on condition A, then evaluate the frozen
# population on held-out scenes of both conditions. Condition B's training
# scenes are never played; they exist only because every world carries a
# training set.
seed = 42
games = 1000000
repetitions = 10

[population]
size = 10

[[dataset]]
name = "cogent_a"
source = { csv = "data/cogent_a.csv" }
expected_channels = 20
train_fraction = 0.9
train_scenes = 70000
test_scenes = 15000

[[dataset]]
name = "cogent_b"
source = { csv = "data/cogent_b.csv" }
expected_channels = 20
train_fraction = 0.9
train_scenes = 100
test_scenes = 15000

[[evaluation]]
after = 1000000
world = "cogent_a"
scenes = "test"
games = 100000

[[evaluation]]
after = 1000000
world = "cogent_b"
scenes = "test"
games = 100000

[output]
records = false
"#;

const CONTINUAL: &str = r#"# Continual learning: train on the image features, evaluate, keep training
# the same population on the wine table, evaluate there, then re-evaluate on
# the image features to measure forgetting.
seed = 42
games = 2000000
repetitions = 10

[population]
size = 10

[[dataset]]
name = "clevr"
source = { csv = "data/clevr.csv" }
expected_channels = 20
train_fraction = 0.9
train_scenes = 70000
test_scenes = 15000

[[dataset]]
name = "wine"
source = { csv = "data/winequality-white.csv" }
delimiter = ";"
exclude_columns = ["quality"]
expected_channels = 11
train_fraction = 0.9
train_scenes = 20000
test_scenes = 1000

[[event]]
at = 1000000
kind = { switch_world = "wine" }

[[evaluation]]
after = 1000000
world = "clevr"
scenes = "test"
games = 100000

[[evaluation]]
after = 2000000
world = "wine"
scenes = "test"
games = 100000

[[evaluation]]
after = 2000000
world = "clevr"
scenes = "test"
games = 100000

[output]
records = false
"#;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ConfigFile, EventKindCfg, SensorSpec, SourceCfg};

    fn load(name: &str) -> ConfigFile {
        let text = toml_for(name).unwrap();
        ConfigFile::from_str_validated(&text).unwrap_or_else(|e| panic!("preset {name}: {e:#}"))
    }

    #[test]
    fn every_preset_parses_and_validates() {
        for name in NAMES {
            let cfg = load(name);
            assert_eq!(cfg.population.size, 10, "{name}");
            assert_eq!(cfg.repetitions, Some(10), "{name}");
            assert!(cfg.seed.is_some(), "{name}");
            assert!(!cfg.evaluations.is_empty(), "{name}");
            assert!(cfg.evaluations.iter().all(|e| e.games == 100000), "{name}");
            assert!(!cfg.output.records, "{name}");
        }
        assert!(toml_for("nope").is_none());
    }

    #[test]
    fn dataset_dimensionalities_match_their_sources() {
        assert_eq!(load("baseline-clevr").datasets[0].expected_channels, Some(20));
        let wine = load("baseline-wine");
        assert_eq!(wine.datasets[0].expected_channels, Some(11));
        assert_eq!(wine.datasets[0].delimiter, Some(';'));
        assert_eq!(wine.datasets[0].train_scenes, 20000);
        assert_eq!(wine.datasets[0].test_scenes, 1000);
        let credit = load("baseline-credit");
        assert_eq!(credit.datasets[0].expected_channels, Some(28));
        assert_eq!(credit.datasets[0].exclude_columns, vec!["Time", "Amount", "Class"]);
        assert_eq!(credit.datasets[0].train_scenes, 40000);
        for name in NAMES {
            for ds in &load(name).datasets {
                assert!(matches!(ds.source, SourceCfg::Csv(_)), "{name}/{}", ds.name);
            }
        }
    }

    #[test]
    fn condition_specific_knobs_are_set() {
        assert!(
            matches!(load("hetero-19").population.sensors, SensorSpec::Random { random: 19 })
        );
        assert!(
            matches!(load("hetero-10").population.sensors, SensorSpec::Random { random: 10 })
        );
        for (name, lose) in [("defect-1", 1), ("defect-10", 10)] {
            let cfg = load(name);
            assert_eq!(cfg.events.len(), 1, "{name}");
            assert_eq!(cfg.events[0].at, 500000, "{name}");
            assert!(
                matches!(cfg.events[0].kind, EventKindCfg::SensorDefect { lose: l } if l == lose),
                "{name}"
            );
        }
        assert_eq!(load("shift-0.1").population.shift_std, 0.1);
        assert_eq!(load("shift-1").population.shift_std, 1.0);
        assert_eq!(load("noise-0.1").population.noise_std, 0.1);
        assert_eq!(load("noise-1").population.noise_std, 1.0);
    }

    #[test]
    fn continual_schedules_the_switch_and_three_evaluations() {
        let cfg = load("continual");
        assert_eq!(cfg.games, 2000000);
        assert_eq!(cfg.datasets.len(), 2);
        assert_eq!(cfg.events.len(), 1);
        assert_eq!(cfg.events[0].at, 1000000);
        assert!(
            matches!(&cfg.events[0].kind, EventKindCfg::SwitchWorld(w) if w == "wine")
        );
        let evals: Vec<(u64, &str)> = cfg
            .evaluations
            .iter()
            .map(|e| (e.after, e.world.as_deref().unwrap()))
            .collect();
        assert_eq!(evals, vec![(1000000, "clevr"), (2000000, "wine"), (2000000, "clevr")]);
    }

    #[test]
    fn baselines_run_a_million_games() {
        for name in ["baseline-clevr", "baseline-wine", "baseline-credit", "cogent"] {
            assert_eq!(load(name).games, 1000000, "{name}");
        }
    }
}
