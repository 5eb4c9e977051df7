//! TagPair: every pair of taggers votes the Tune distribution of the correct
//! tag given the two tags they suggested.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Tag, TaggerMatrix};
use crate::error::{Error, Result};
use crate::voting::{majority_scores, pick};

type Counts = BTreeMap<Tag, u64>;

fn normalize(counts: &Counts) -> Vec<(Tag, f64)> {
    let total: u64 = counts.values().sum();
    counts
        .iter()
        .map(|(t, &c)| (t.clone(), c as f64 / total as f64))
        .collect()
}

/// Conditional gold-tag counts for tagger pairs and single taggers.
#[derive(Clone, Debug, PartialEq)]
pub struct PairTable {
    tagger_ids: Vec<String>,
    min_pair_count: u64,
    /// (i, j, s_i, s_j) with i < j → gold counts.
    pairs: BTreeMap<(usize, usize, Tag, Tag), Counts>,
    /// (i, s_i) → gold counts.
    singles: BTreeMap<(usize, Tag), Counts>,
}

#[derive(Serialize, Deserialize)]
struct PairEntry {
    i: usize,
    j: usize,
    t1: Tag,
    t2: Tag,
    gold: Counts,
}

#[derive(Serialize, Deserialize)]
struct SingleEntry {
    i: usize,
    t: Tag,
    gold: Counts,
}

#[derive(Serialize, Deserialize)]
struct PairTableData {
    tagger_ids: Vec<String>,
    min_pair_count: u64,
    pairs: Vec<PairEntry>,
    singles: Vec<SingleEntry>,
}

impl PairTable {
    pub fn train(matrix: &TaggerMatrix) -> Result<PairTable> {
        if matrix.num_taggers() < 2 {
            return Err(Error::InvalidParameter(
                "TagPair needs at least two taggers".into(),
            ));
        }
        let golds = matrix.golds()?;
        let n = matrix.num_taggers();
        let mut pairs: BTreeMap<(usize, usize, Tag, Tag), Counts> = BTreeMap::new();
        let mut singles: BTreeMap<(usize, Tag), Counts> = BTreeMap::new();
        for (row, gold) in matrix.rows().iter().zip(golds) {
            let s = &row.suggestions;
            for i in 0..n {
                *singles
                    .entry((i, s[i].clone()))
                    .or_default()
                    .entry(gold.clone())
                    .or_insert(0) += 1;
                for j in i + 1..n {
                    *pairs
                        .entry((i, j, s[i].clone(), s[j].clone()))
                        .or_default()
                        .entry(gold.clone())
                        .or_insert(0) += 1;
                }
            }
        }
        Ok(PairTable {
            tagger_ids: matrix.tagger_ids().to_vec(),
            min_pair_count: 1,
            pairs,
            singles,
        })
    }

    /// Pair situations seen fewer than `k` times are treated as unseen.
    pub fn with_min_pair_count(mut self, k: u64) -> PairTable {
        self.min_pair_count = k.max(1);
        self
    }

    pub fn tagger_ids(&self) -> &[String] {
        &self.tagger_ids
    }

    pub fn num_taggers(&self) -> usize {
        self.tagger_ids.len()
    }

    pub fn min_pair_count(&self) -> u64 {
        self.min_pair_count
    }

    pub fn pair_counts(&self, i: usize, j: usize, t1: &Tag, t2: &Tag) -> Option<&Counts> {
        if i < j {
            self.pairs.get(&(i, j, t1.clone(), t2.clone()))
        } else {
            self.pairs.get(&(j, i, t2.clone(), t1.clone()))
        }
    }

    /// P(gold | s_i = t1, s_j = t2) if the situation was seen at least
    /// `min_pair_count` times.
    pub fn pair_distribution(
        &self,
        i: usize,
        j: usize,
        t1: &Tag,
        t2: &Tag,
    ) -> Option<Vec<(Tag, f64)>> {
        let c = self.pair_counts(i, j, t1, t2)?;
        if c.values().sum::<u64>() < self.min_pair_count {
            return None;
        }
        Some(normalize(c))
    }

    pub fn single_distribution(&self, i: usize, t: &Tag) -> Option<Vec<(Tag, f64)>> {
        self.singles.get(&(i, t.clone())).map(normalize)
    }

    /// All stored distributions, for inspection.
    pub fn distributions(&self) -> impl Iterator<Item = Vec<(Tag, f64)>> + '_ {
        self.pairs
            .values()
            .chain(self.singles.values())
            .map(normalize)
    }

    /// The vote of pair (i, j): its observed distribution, or the equal mix
    /// of the two single-tagger distributions.
    pub fn contribution(&self, i: usize, j: usize, t1: &Tag, t2: &Tag) -> Vec<(Tag, f64)> {
        if let Some(d) = self.pair_distribution(i, j, t1, t2) {
            return d;
        }
        let mut mix: BTreeMap<Tag, f64> = BTreeMap::new();
        for (k, t) in [(i, t1), (j, t2)] {
            if let Some(d) = self.single_distribution(k, t) {
                for (tag, p) in d {
                    *mix.entry(tag).or_insert(0.0) += 0.5 * p;
                }
            }
        }
        mix.into_iter().collect()
    }

    pub fn scores(&self, suggestions: &[Tag]) -> BTreeMap<Tag, f64> {
        let mut scores = BTreeMap::new();
        let n = suggestions.len();
        for i in 0..n {
            for j in i + 1..n {
                for (t, p) in self.contribution(i, j, &suggestions[i], &suggestions[j]) {
                    *scores.entry(t).or_insert(0.0) += p;
                }
            }
        }
        scores.retain(|_, s| *s > 0.0);
        scores
    }

    /// Highest-scoring tag over every tag any consulted distribution names.
    /// Falls through to Majority when nothing was seen on Tune.
    pub fn vote<R: Rng + ?Sized>(&self, suggestions: &[Tag], rng: &mut R) -> Tag {
        let scores = self.scores(suggestions);
        if scores.is_empty() {
            return pick(&majority_scores(suggestions), rng);
        }
        pick(&scores, rng)
    }

    pub fn to_json(&self) -> Result<String> {
        let data = PairTableData {
            tagger_ids: self.tagger_ids.clone(),
            min_pair_count: self.min_pair_count,
            pairs: self
                .pairs
                .iter()
                .map(|((i, j, t1, t2), gold)| PairEntry {
                    i: *i,
                    j: *j,
                    t1: t1.clone(),
                    t2: t2.clone(),
                    gold: gold.clone(),
                })
                .collect(),
            singles: self
                .singles
                .iter()
                .map(|((i, t), gold)| SingleEntry {
                    i: *i,
                    t: t.clone(),
                    gold: gold.clone(),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&data)?)
    }

    pub fn from_json(text: &str) -> Result<PairTable> {
        let data: PairTableData = serde_json::from_str(text)?;
        Ok(PairTable {
            tagger_ids: data.tagger_ids,
            min_pair_count: data.min_pair_count,
            pairs: data
                .pairs
                .into_iter()
                .map(|e| ((e.i, e.j, e.t1, e.t2), e.gold))
                .collect(),
            singles: data
                .singles
                .into_iter()
                .map(|e| ((e.i, e.t), e.gold))
                .collect(),
        })
    }
}

pub fn vote_tagpair<R: Rng + ?Sized>(suggestions: &[Tag], table: &PairTable, rng: &mut R) -> Tag {
    table.vote(suggestions, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::MatrixRow;
    use crate::seed::row_rng;

    fn row(s: &[&str], gold: &str) -> MatrixRow {
        MatrixRow {
            token: "w".into(),
            suggestions: s.iter().map(|x| Tag::new(x)).collect(),
            gold: Some(Tag::new(gold)),
        }
    }

    fn matrix(n: usize, rows: Vec<MatrixRow>) -> TaggerMatrix {
        TaggerMatrix::new((0..n).map(|i| format!("t{i}")).collect(), vec![rows]).unwrap()
    }

    #[test]
    fn agreeing_reliable_pair() {
        let m = matrix(2, vec![row(&["X", "X"], "X"), row(&["Y", "Y"], "Y")]);
        let t = PairTable::train(&m).unwrap();
        let x = Tag::new("X");
        assert_eq!(
            t.pair_distribution(0, 1, &x, &x),
            Some(vec![(x.clone(), 1.0)])
        );
        assert_eq!(t.vote(&[x.clone(), x.clone()], &mut row_rng(0, 0)), x);
    }

    #[test]
    fn unsuggested_tag_can_win() {
        let m = matrix(2, vec![row(&["X", "Y"], "Z")]);
        let t = PairTable::train(&m).unwrap();
        assert_eq!(
            t.vote(&[Tag::new("X"), Tag::new("Y")], &mut row_rng(0, 0)),
            Tag::new("Z")
        );
    }

    #[test]
    fn unseen_pair_mixes_singles() {
        let m = matrix(
            2,
            vec![
                row(&["X", "X"], "X"),
                row(&["Y", "Y"], "Y"),
                row(&["X", "Y"], "Y"),
            ],
        );
        let t = PairTable::train(&m).unwrap();
        // (Y, X) never seen together.
        let c: BTreeMap<Tag, f64> = t
            .contribution(0, 1, &Tag::new("Y"), &Tag::new("X"))
            .into_iter()
            .collect();
        // single(0, Y) = {Y: 1}; single(1, X) = {X: 1}.
        assert!((c[&Tag::new("X")] - 0.5).abs() < 1e-12);
        assert!((c[&Tag::new("Y")] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fully_unseen_row_uses_majority() {
        let m = matrix(3, vec![row(&["X", "X", "X"], "X")]);
        let t = PairTable::train(&m).unwrap();
        let s = [Tag::new("A"), Tag::new("A"), Tag::new("B")];
        assert!(t.scores(&s).is_empty());
        assert_eq!(t.vote(&s, &mut row_rng(1, 1)), Tag::new("A"));
    }

    #[test]
    fn min_pair_count_forces_fallback() {
        let m = matrix(
            2,
            vec![
                row(&["X", "Y"], "Z"),
                row(&["X", "X"], "X"),
                row(&["Y", "Y"], "Y"),
            ],
        );
        let t = PairTable::train(&m).unwrap().with_min_pair_count(2);
        assert!(t
            .pair_distribution(0, 1, &Tag::new("X"), &Tag::new("Y"))
            .is_none());
    }

    #[test]
    fn needs_two_taggers() {
        let m = matrix(1, vec![row(&["X"], "X")]);
        assert!(PairTable::train(&m).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = matrix(
            3,
            vec![row(&["X", "Y", "X"], "X"), row(&["Y", "Y", "Z"], "Y")],
        );
        let t = PairTable::train(&m).unwrap();
        assert_eq!(PairTable::from_json(&t.to_json().unwrap()).unwrap(), t);
    }
}
