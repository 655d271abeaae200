//! Property tests for structural invariants the engine relies on.

use std::collections::BTreeSet;

use lexgame_core::concept::{hellinger_similarity, ChannelStat, Concept};
use lexgame_core::metrics::RollingWindow;
use lexgame_core::world::{split_entities, PerceivedVector};
use lexgame_core::{Agent, Params, PerceptionProfile, Word, WordForm};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MAX_CH: u16 = 6;

fn stat_strategy() -> impl Strategy<Value = ChannelStat> {
    (0.0..1.0f64, 1e-9..0.1f64, 1u64..100, -12.0..12.0f64)
        .prop_map(|(mean, m2, count, weight_logit)| ChannelStat { mean, m2, count, weight_logit })
}

fn concept_strategy() -> impl Strategy<Value = Concept> {
    proptest::collection::btree_map(0..MAX_CH, stat_strategy(), 1..=MAX_CH as usize)
        .prop_map(|m| Concept::from_entries(m.into_iter().collect()).unwrap())
}

fn pv_strategy() -> impl Strategy<Value = PerceivedVector> {
    proptest::collection::btree_map(0..MAX_CH, -0.5..1.5f64, 1..=MAX_CH as usize)
        .prop_map(|m| PerceivedVector::from_entries(m.into_iter().collect()))
}

proptest! {
    #[test]
    fn entity_similarity_is_a_unit_weighted_mean(c in concept_strategy(), v in pv_strategy()) {
        let params = Params::default();
        if let Ok(sim) = c.entity_similarity(&v, &params) {
            prop_assert!((0.0..=1.0).contains(&sim), "sim = {sim}");
        } else {
            // Error only on disjoint channel sets.
            let shared = c.channels().filter(|&ch| v.get(ch).is_some()).count();
            prop_assert_eq!(shared, 0);
        }
    }

    #[test]
    fn concept_similarity_is_bounded_and_symmetric(a in concept_strategy(), b in concept_strategy()) {
        let params = Params::default();
        match (a.concept_similarity(&b, &params), b.concept_similarity(&a, &params)) {
            (Ok(x), Ok(y)) => {
                prop_assert!((0.0..=1.0).contains(&x), "sim = {x}");
                prop_assert!((x - y).abs() < 1e-12, "asymmetry: {x} vs {y}");
            }
            (Err(_), Err(_)) => {}
            (x, y) => prop_assert!(false, "one side errored: {x:?} vs {y:?}"),
        }
        // Self-similarity is maximal exactly when attention matches itself.
        let self_sim = a.concept_similarity(&a, &params).unwrap();
        prop_assert!((self_sim - 1.0).abs() < 1e-9, "self sim = {self_sim}");
    }

    #[test]
    fn hellinger_is_a_bounded_symmetric_similarity(
        ma in -1.0..2.0f64, sa in 1e-6..1.0f64, mb in -1.0..2.0f64, sb in 1e-6..1.0f64
    ) {
        let sim = hellinger_similarity(ma, sa, mb, sb);
        prop_assert!((0.0..=1.0).contains(&sim), "sim = {sim}");
        prop_assert_eq!(sim, hellinger_similarity(mb, sb, ma, sa));
        prop_assert_eq!(hellinger_similarity(ma, sa, ma, sa), 1.0);
    }

    #[test]
    fn welford_tracks_batch_statistics(
        init in 0.0..1.0f64,
        xs in proptest::collection::vec(-0.5..1.5f64, 0..40)
    ) {
        let params = Params::default();
        let mut stat = ChannelStat::from_observation(init, &params);
        for &x in &xs {
            stat.observe(x);
        }
        prop_assert_eq!(stat.count as usize, 1 + xs.len());
        prop_assert!(stat.m2 >= 0.0);
        prop_assert!(stat.std() >= 0.0);
        let lo = xs.iter().copied().fold(init, f64::min);
        let hi = xs.iter().copied().fold(init, f64::max);
        prop_assert!(stat.mean >= lo - 1e-12 && stat.mean <= hi + 1e-12);
    }

    #[test]
    fn weight_steps_saturate_within_unit_interval(
        steps in proptest::collection::vec(prop_oneof![Just(1.0f64), Just(-5.0f64)], 0..200)
    ) {
        let params = Params::default();
        let mut stat = ChannelStat::from_observation(0.5, &params);
        for &s in &steps {
            stat.shift_weight(s);
            prop_assert!(stat.weight() > 0.0 && stat.weight() < 1.0);
            prop_assert!(stat.weight_logit.abs() <= 70.0);
        }
    }

    #[test]
    fn rolling_window_mean_is_tail_mean(
        xs in proptest::collection::vec(0.0..1.0f64, 1..80),
        cap in 1usize..20
    ) {
        let mut w = RollingWindow::new(cap);
        for &x in &xs {
            w.push(x);
        }
        let tail: Vec<f64> = xs.iter().rev().take(cap).copied().collect();
        prop_assert_eq!(w.len(), tail.len());
        let naive = tail.iter().sum::<f64>() / tail.len() as f64;
        prop_assert!((w.mean().unwrap() - naive).abs() < 1e-9);
    }

    #[test]
    fn subset_search_is_structurally_sound(
        c in concept_strategy(),
        vs in proptest::collection::vec(pv_strategy(), 2..5),
        cap in proptest::option::of(1usize..4)
    ) {
        let mut params = Params::default();
        params.max_subset_channels = cap;
        let topic = 0;
        let shared: Vec<u16> = c.channels().filter(|&ch| vs[topic].get(ch).is_some()).collect();
        match c.best_channel_subset(&vs, topic, &params) {
            Err(_) => prop_assert!(shared.is_empty()),
            Ok(subset) => {
                prop_assert!(!subset.is_empty());
                prop_assert!(subset.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(subset.iter().all(|ch| shared.contains(ch)));
                if let Some(cap) = cap {
                    prop_assert!(subset.len() <= cap.max(1));
                }
            }
        }
    }

    #[test]
    fn production_returns_only_real_candidates(
        concepts in proptest::collection::vec(concept_strategy(), 0..5),
        vs in proptest::collection::vec(pv_strategy(), 2..5),
        scores in proptest::collection::vec(0.0..=1.0f64, 5)
    ) {
        let params = Params::default();
        let words: Vec<Word> = concepts
            .into_iter()
            .zip(&scores)
            .enumerate()
            .map(|(i, (concept, &score))| Word { form: WordForm::new(format!("w{i}")), concept, score })
            .collect();
        let agent = Agent::from_parts(0, (0..MAX_CH).collect(), PerceptionProfile::exact(), words)
            .unwrap();
        let topic = 0;
        let cands = agent.candidate_words(&vs, topic, &params);
        for &(i, dp) in &cands {
            prop_assert!(dp > 0.0);
            prop_assert!(i < agent.inventory().len());
        }
        match agent.produce_read_only(&vs, topic, &params) {
            Some(i) => prop_assert!(cands.iter().any(|&(j, _)| j == i)),
            None => prop_assert!(cands.is_empty()),
        }
        // Interpretation of any known form points inside the context.
        for w in agent.inventory() {
            if let Some(p) = agent.interpret(w.form.as_str(), &vs, &params) {
                prop_assert!(p < vs.len());
            }
        }
    }

    #[test]
    fn intersection_matches_set_semantics(
        a in proptest::collection::btree_set(0u16..40, 0..25),
        b in proptest::collection::btree_set(0u16..40, 0..25)
    ) {
        let av: Vec<u16> = a.iter().copied().collect();
        let bv: Vec<u16> = b.iter().copied().collect();
        let table = lexgame_core::ChannelTable::from_names(
            av.iter().chain(&bv).map(|ch| format!("ch{ch:02}")).collect::<Vec<_>>(),
        );
        let expect: Vec<String> =
            a.intersection(&b).map(|ch| format!("ch{ch:02}")).collect();
        // Interning then intersecting index lists equals set intersection
        // because interning is order-preserving on zero-padded names.
        let ai = table.indices(av.iter().map(|ch| format!("ch{ch:02}")).collect::<Vec<_>>().iter().map(|s| s.as_str())).unwrap();
        let bi = table.indices(bv.iter().map(|ch| format!("ch{ch:02}")).collect::<Vec<_>>().iter().map(|s| s.as_str())).unwrap();
        let got: BTreeSet<u16> = ai.iter().copied().collect::<BTreeSet<_>>()
            .intersection(&bi.iter().copied().collect())
            .copied()
            .collect();
        let got_names: Vec<String> = got.iter().map(|&i| table.name(i).to_string()).collect();
        prop_assert_eq!(got_names, expect);
    }

    #[test]
    fn entity_split_partitions(
        n in 2usize..200,
        fraction in 0.01..0.99f64,
        seed in any::<u64>()
    ) {
        let ids: Vec<u32> = (0..n as u32).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (train, test) = split_entities(&ids, fraction, &mut rng).unwrap();
        prop_assert!(!train.is_empty() && !test.is_empty());
        let mut union: Vec<u32> = train.iter().chain(&test).copied().collect();
        union.sort_unstable();
        prop_assert_eq!(union, ids);
    }
}
