mod common;

use std::collections::{BTreeMap, HashMap};

use common::*;
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use tagcombo::corpus::Lexicon;
use tagcombo::eval::baseline_random;
use tagcombo::seed::{rng_from_seed, row_rng};
use tagcombo::voting::{
    majority_scores, tag_precision_scores, tot_precision_scores, vote_majority, VotingRule,
    WeightTable,
};
use tagcombo::Tag;

fn chi_square_uniform(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let e = n as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    ChiSquared::new((counts.len() - 1) as f64).unwrap().sf(stat)
}

#[test]
fn weight_table_matches_recount() {
    let mut rng = rng_from_seed(3);
    let m = random_matrix(&mut rng, 4, &["A", "B", "C", "D", "E", "F"], 5000);
    let table = WeightTable::from_matrix(&m).unwrap();
    for i in 0..4 {
        let mut said: HashMap<&str, (u64, u64)> = HashMap::new();
        let mut gold: HashMap<&str, (u64, u64)> = HashMap::new();
        let mut right = 0;
        for r in m.rows() {
            let g = r.gold.as_ref().unwrap().as_str();
            let s = r.suggestions[i].as_str();
            let hit = (s == g) as u64;
            right += hit;
            let e = said.entry(s).or_default();
            e.0 += 1;
            e.1 += hit;
            let e = gold.entry(g).or_default();
            e.0 += 1;
            e.1 += hit;
        }
        assert!((table.overall_accuracy(i) - right as f64 / 5000.0).abs() < 1e-12);
        for (tag, (n, c)) in &said {
            assert!((table.precision(i, &t(tag)) - *c as f64 / *n as f64).abs() < 1e-12);
        }
        for (tag, (n, c)) in &gold {
            assert!((table.recall(i, &t(tag)) - *c as f64 / *n as f64).abs() < 1e-12);
        }
    }
}

#[test]
fn precision_scores_match_naive_recomputation() {
    let mut rng = rng_from_seed(4);
    let tune = random_matrix(&mut rng, 4, &["A", "B", "C", "D"], 800);
    let table = WeightTable::from_matrix(&tune).unwrap();
    let rows = random_matrix(&mut rng, 4, &["A", "B", "C", "D", "E"], 1000);
    for r in rows.rows() {
        let s = &r.suggestions;
        let mut tot: BTreeMap<Tag, f64> = BTreeMap::new();
        let mut tag: BTreeMap<Tag, f64> = BTreeMap::new();
        for (i, x) in s.iter().enumerate() {
            *tot.entry(x.clone()).or_default() += table.overall_accuracy(i);
            *tag.entry(x.clone()).or_default() += table.precision(i, x);
        }
        for (want, got) in [
            (tot, tot_precision_scores(s, &table)),
            (tag, tag_precision_scores(s, &table)),
        ] {
            assert_eq!(want.len(), got.len());
            for ((a, v), (b, w)) in want.iter().zip(&got) {
                assert_eq!(a, b);
                assert!((v - w).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn two_way_tie_is_even_and_seed_stable() {
    let s = tags("X,X,Y,Y");
    let mut counts = [0u64; 2];
    for seed in 0..10_000u64 {
        let a = vote_majority(&s, &mut rng_from_seed(seed));
        assert_eq!(a, vote_majority(&s, &mut rng_from_seed(seed)));
        counts[(a.as_str() == "Y") as usize] += 1;
    }
    let p = chi_square_uniform(&counts);
    assert!(p > 0.01, "{counts:?} p={p}");
}

#[test]
fn four_way_tie_is_uniform_across_rows() {
    let s = tags("X,Y,Z,W");
    let mut counts: BTreeMap<Tag, u64> = BTreeMap::new();
    for row in 0..10_000 {
        *counts
            .entry(vote_majority(&s, &mut row_rng(42, row)))
            .or_default() += 1;
    }
    assert_eq!(counts.len(), 4);
    let p = chi_square_uniform(&counts.values().copied().collect::<Vec<_>>());
    assert!(p > 0.01, "{counts:?} p={p}");
}

#[test]
fn random_baseline_is_uniform_over_lexicon_tags() {
    let mut lex = Lexicon::default();
    for _ in 0..9 {
        lex.add("w", &t("X"));
    }
    lex.add("w", &t("Y"));
    let mut counts = [0u64; 2];
    for seed in 0..5000 {
        let r = baseline_random(&lex, &["w"], &mut rng_from_seed(seed));
        counts[(r[0].as_str() == "Y") as usize] += 1;
    }
    let p = chi_square_uniform(&counts);
    assert!(p > 0.01, "{counts:?} p={p}");
}

fn suggestion_rows() -> impl Strategy<Value = (Vec<String>, Vec<f64>, u64)> {
    (2usize..=6).prop_flat_map(|n| {
        (
            prop::collection::vec(
                prop::sample::select(vec!["A", "B", "C", "D"]).prop_map(String::from),
                n,
            ),
            prop::collection::vec(0.05f64..1.0, n),
            any::<u64>(),
        )
    })
}

proptest! {
    #[test]
    fn winner_is_suggested_and_ties_are_deterministic((s, acc, seed) in suggestion_rows()) {
        let s: Vec<Tag> = s.iter().map(|x| t(x)).collect();
        let table = WeightTable::from_accuracies((0..s.len()).map(|i| format!("t{i}")).collect(), acc);
        for rule in VotingRule::ALL {
            let a = rule.vote(&s, &table, &mut rng_from_seed(seed));
            prop_assert!(s.contains(&a));
            prop_assert_eq!(a, rule.vote(&s, &table, &mut rng_from_seed(seed)));
        }
    }

    #[test]
    fn majority_counts_votes((s, _acc, _seed) in suggestion_rows()) {
        let s: Vec<Tag> = s.iter().map(|x| t(x)).collect();
        let m = majority_scores(&s);
        prop_assert_eq!(m.values().sum::<f64>(), s.len() as f64);
        let mut rng = rng_from_seed(1);
        let w = vote_majority(&s, &mut rng);
        let top = m.values().cloned().fold(0.0, f64::max);
        prop_assert_eq!(m[&w], top);
    }
}

#[test]
fn strong_tagger_can_be_outvoted() {
    let table = WeightTable::from_accuracies(
        vec!["a".into(), "b".into(), "c".into(), "d".into()],
        vec![0.97, 0.5, 0.5, 0.5],
    );
    assert_eq!(
        VotingRule::TotPrecision.vote(&tags("X,Y,Y,Y"), &table, &mut rng_from_seed(0)),
        t("Y")
    );
}
