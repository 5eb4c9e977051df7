//! Simple voting: Majority, TotPrecision, TagPrecision and Precision-Recall.
//!
//! Weights come from a [`WeightTable`] measured on Tune. Ties are settled by
//! a uniform draw among the winning tags.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Tag, TaggerMatrix};
use crate::error::{Error, Result};
use crate::seed::break_tie;

/// Scores closer than this are tied.
pub const SCORE_EPSILON: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagStats {
    /// Tokens the tagger labeled with the tag.
    pub suggested: u64,
    /// Of those, tokens whose gold tag is the tag.
    pub correct: u64,
    /// Gold occurrences of the tag.
    pub gold: u64,
}

/// Per-tagger accuracy and per-tag precision and recall.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    tagger_ids: Vec<String>,
    overall: Vec<f64>,
    stats: Vec<BTreeMap<Tag, TagStats>>,
    precision: Vec<BTreeMap<Tag, f64>>,
    recall: Vec<BTreeMap<Tag, f64>>,
}

impl WeightTable {
    pub fn from_matrix(matrix: &TaggerMatrix) -> Result<WeightTable> {
        let golds = matrix.golds()?;
        let n = matrix.num_taggers();
        let mut correct_total = vec![0u64; n];
        let mut stats: Vec<BTreeMap<Tag, TagStats>> = vec![BTreeMap::new(); n];
        for (row, gold) in matrix.rows().iter().zip(&golds) {
            for (i, s) in row.suggestions.iter().enumerate() {
                let hit = s == *gold;
                let e = stats[i].entry(s.clone()).or_default();
                e.suggested += 1;
                if hit {
                    e.correct += 1;
                    correct_total[i] += 1;
                }
                stats[i].entry((*gold).clone()).or_default().gold += 1;
            }
        }
        let total = matrix.len().max(1) as f64;
        let precision = stats
            .iter()
            .map(|m| {
                m.iter()
                    .filter(|(_, s)| s.suggested > 0)
                    .map(|(t, s)| (t.clone(), s.correct as f64 / s.suggested as f64))
                    .collect()
            })
            .collect();
        let recall = stats
            .iter()
            .map(|m| {
                m.iter()
                    .filter(|(_, s)| s.gold > 0)
                    .map(|(t, s)| (t.clone(), s.correct as f64 / s.gold as f64))
                    .collect()
            })
            .collect();
        Ok(WeightTable {
            tagger_ids: matrix.tagger_ids().to_vec(),
            overall: correct_total.iter().map(|&c| c as f64 / total).collect(),
            stats,
            precision,
            recall,
        })
    }

    /// A table with only overall accuracies; per-tag values fall back to them.
    pub fn from_accuracies(tagger_ids: Vec<String>, accuracies: Vec<f64>) -> WeightTable {
        let n = accuracies.len();
        WeightTable {
            tagger_ids,
            overall: accuracies,
            stats: vec![BTreeMap::new(); n],
            precision: vec![BTreeMap::new(); n],
            recall: vec![BTreeMap::new(); n],
        }
    }

    pub fn set_precision(&mut self, tagger: usize, tag: &Tag, value: f64) {
        self.precision[tagger].insert(tag.clone(), value);
    }

    pub fn set_recall(&mut self, tagger: usize, tag: &Tag, value: f64) {
        self.recall[tagger].insert(tag.clone(), value);
    }

    pub fn tagger_ids(&self) -> &[String] {
        &self.tagger_ids
    }

    pub fn num_taggers(&self) -> usize {
        self.overall.len()
    }

    pub fn overall_accuracy(&self, tagger: usize) -> f64 {
        self.overall[tagger]
    }

    /// Raw counts behind the precision and recall of `tag`.
    pub fn stats(&self, tagger: usize, tag: &Tag) -> Option<TagStats> {
        self.stats[tagger].get(tag).copied()
    }

    /// Precision on `tag`; the tagger's overall accuracy if it never
    /// suggested `tag` on Tune.
    pub fn precision(&self, tagger: usize, tag: &Tag) -> f64 {
        self.precision[tagger]
            .get(tag)
            .copied()
            .unwrap_or(self.overall[tagger])
    }

    /// Recall on `tag`; the tagger's overall accuracy if `tag` never
    /// occurred in the Tune benchmark.
    pub fn recall(&self, tagger: usize, tag: &Tag) -> f64 {
        self.recall[tagger]
            .get(tag)
            .copied()
            .unwrap_or(self.overall[tagger])
    }

    /// Permutes taggers: new tagger k is old tagger `order[k]`.
    pub fn reorder(&self, order: &[usize]) -> WeightTable {
        WeightTable {
            tagger_ids: order.iter().map(|&i| self.tagger_ids[i].clone()).collect(),
            overall: order.iter().map(|&i| self.overall[i]).collect(),
            stats: order.iter().map(|&i| self.stats[i].clone()).collect(),
            precision: order.iter().map(|&i| self.precision[i].clone()).collect(),
            recall: order.iter().map(|&i| self.recall[i].clone()).collect(),
        }
    }
}

/// Tags within [`SCORE_EPSILON`] of the best score, in lexicographic order.
pub fn winners(scores: &BTreeMap<Tag, f64>) -> Vec<Tag> {
    let best = scores.values().copied().fold(f64::NEG_INFINITY, f64::max);
    scores
        .iter()
        .filter(|(_, &s)| s >= best - SCORE_EPSILON)
        .map(|(t, _)| t.clone())
        .collect()
}

pub fn pick<R: Rng + ?Sized>(scores: &BTreeMap<Tag, f64>, rng: &mut R) -> Tag {
    break_tie(winners(scores), rng)
}

fn weighted_scores<F: Fn(usize, &Tag) -> f64>(
    suggestions: &[Tag],
    weight: F,
) -> BTreeMap<Tag, f64> {
    let mut scores = BTreeMap::new();
    for (i, s) in suggestions.iter().enumerate() {
        *scores.entry(s.clone()).or_insert(0.0) += weight(i, s);
    }
    scores
}

pub fn majority_scores(suggestions: &[Tag]) -> BTreeMap<Tag, f64> {
    weighted_scores(suggestions, |_, _| 1.0)
}

pub fn tot_precision_scores(suggestions: &[Tag], table: &WeightTable) -> BTreeMap<Tag, f64> {
    weighted_scores(suggestions, |i, _| table.overall_accuracy(i))
}

pub fn tag_precision_scores(suggestions: &[Tag], table: &WeightTable) -> BTreeMap<Tag, f64> {
    weighted_scores(suggestions, |i, t| table.precision(i, t))
}

/// Each tagger adds its precision to its own suggestion and `1 − recall` to
/// every other suggested tag.
pub fn precision_recall_scores(suggestions: &[Tag], table: &WeightTable) -> BTreeMap<Tag, f64> {
    let mut scores = tag_precision_scores(suggestions, table);
    let suggested: Vec<Tag> = scores.keys().cloned().collect();
    for (i, s) in suggestions.iter().enumerate() {
        for t in suggested.iter().filter(|t| *t != s) {
            *scores.get_mut(t).expect("suggested tag") += 1.0 - table.recall(i, t);
        }
    }
    scores
}

pub fn vote_majority<R: Rng + ?Sized>(suggestions: &[Tag], rng: &mut R) -> Tag {
    pick(&majority_scores(suggestions), rng)
}

pub fn vote_tot_precision<R: Rng + ?Sized>(
    suggestions: &[Tag],
    table: &WeightTable,
    rng: &mut R,
) -> Tag {
    pick(&tot_precision_scores(suggestions, table), rng)
}

pub fn vote_tag_precision<R: Rng + ?Sized>(
    suggestions: &[Tag],
    table: &WeightTable,
    rng: &mut R,
) -> Tag {
    pick(&tag_precision_scores(suggestions, table), rng)
}

pub fn vote_precision_recall<R: Rng + ?Sized>(
    suggestions: &[Tag],
    table: &WeightTable,
    rng: &mut R,
) -> Tag {
    pick(&precision_recall_scores(suggestions, table), rng)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VotingRule {
    Majority,
    TotPrecision,
    TagPrecision,
    PrecisionRecall,
}

impl VotingRule {
    pub const ALL: [VotingRule; 4] = [
        VotingRule::Majority,
        VotingRule::TotPrecision,
        VotingRule::TagPrecision,
        VotingRule::PrecisionRecall,
    ];

    pub fn scores(self, suggestions: &[Tag], table: &WeightTable) -> BTreeMap<Tag, f64> {
        match self {
            VotingRule::Majority => majority_scores(suggestions),
            VotingRule::TotPrecision => tot_precision_scores(suggestions, table),
            VotingRule::TagPrecision => tag_precision_scores(suggestions, table),
            VotingRule::PrecisionRecall => precision_recall_scores(suggestions, table),
        }
    }

    pub fn vote<R: Rng + ?Sized>(
        self,
        suggestions: &[Tag],
        table: &WeightTable,
        rng: &mut R,
    ) -> Tag {
        pick(&self.scores(suggestions, table), rng)
    }
}

/// Checks a table covers the taggers of a matrix.
pub fn check_table(table: &WeightTable, matrix: &TaggerMatrix) -> Result<()> {
    if table.num_taggers() != matrix.num_taggers() {
        return Err(Error::InvalidParameter(format!(
            "weight table has {} taggers, matrix {}",
            table.num_taggers(),
            matrix.num_taggers()
        )));
    }
    Ok(())
}
