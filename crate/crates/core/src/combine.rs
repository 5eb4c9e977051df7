//! Uniform front for every combination method: train on Tune, apply to a
//! matrix row by row with per-row tie-break streams.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{Tag, TaggerMatrix};
use crate::error::{Error, Result};
use crate::pairwise::PairTable;
use crate::seed::row_rng;
use crate::stacker::{MblStacker, StackVariant, TreeStacker, DEFAULT_CONFIDENCE};
use crate::voting::{VotingRule, WeightTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Vote(VotingRule),
    TagPair,
    StackMbl(StackVariant),
    StackTree(StackVariant),
}

impl Method {
    /// Parses a method name; stacked methods take their variant separately.
    pub fn parse(name: &str, variant: StackVariant) -> Result<Method> {
        Ok(match name {
            "majority" => Method::Vote(VotingRule::Majority),
            "totprec" => Method::Vote(VotingRule::TotPrecision),
            "tagprec" => Method::Vote(VotingRule::TagPrecision),
            "precrec" => Method::Vote(VotingRule::PrecisionRecall),
            "tagpair" => Method::TagPair,
            "stack-mbl" => Method::StackMbl(variant),
            "stack-tree" => Method::StackTree(variant),
            _ => return Err(Error::InvalidParameter(format!("unknown method '{name}'"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Vote(VotingRule::Majority) => "majority",
            Method::Vote(VotingRule::TotPrecision) => "totprec",
            Method::Vote(VotingRule::TagPrecision) => "tagprec",
            Method::Vote(VotingRule::PrecisionRecall) => "precrec",
            Method::TagPair => "tagpair",
            Method::StackMbl(_) => "stack-mbl",
            Method::StackTree(_) => "stack-tree",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::StackMbl(v) | Method::StackTree(v) => write!(f, "{}:{}", self.name(), v),
            _ => f.write_str(self.name()),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    /// Accepts `name` or `name:variant`.
    fn from_str(s: &str) -> Result<Method> {
        match s.split_once(':') {
            Some((name, variant)) => Method::parse(name, variant.parse()?),
            None => Method::parse(s, StackVariant::Tags),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CombineParams {
    pub min_pair_count: u64,
    /// Pruning confidence for the tree stacker; `None` disables pruning.
    pub prune_cf: Option<f64>,
}

impl Default for CombineParams {
    fn default() -> Self {
        CombineParams {
            min_pair_count: 1,
            prune_cf: Some(DEFAULT_CONFIDENCE),
        }
    }
}

/// A trained combiner.
#[derive(Clone, Debug)]
pub enum Combiner {
    Vote {
        rule: VotingRule,
        table: WeightTable,
    },
    TagPair(PairTable),
    StackMbl(MblStacker),
    StackTree(TreeStacker),
}

impl Combiner {
    pub fn train(method: Method, params: &CombineParams, tune: &TaggerMatrix) -> Result<Combiner> {
        if !tune.has_gold() {
            return Err(Error::MissingGold);
        }
        Ok(match method {
            Method::Vote(rule) => Combiner::Vote {
                rule,
                table: WeightTable::from_matrix(tune)?,
            },
            Method::TagPair => Combiner::TagPair(
                PairTable::train(tune)?.with_min_pair_count(params.min_pair_count),
            ),
            Method::StackMbl(v) => Combiner::StackMbl(MblStacker::train(tune, v)?),
            Method::StackTree(v) => {
                Combiner::StackTree(TreeStacker::train(tune, v, params.prune_cf)?)
            }
        })
    }

    pub fn num_taggers(&self) -> usize {
        match self {
            Combiner::Vote { table, .. } => table.num_taggers(),
            Combiner::TagPair(t) => t.num_taggers(),
            Combiner::StackMbl(s) => s.num_taggers(),
            Combiner::StackTree(s) => s.num_taggers(),
        }
    }

    /// Combined tag for one row; `seed` is the run's global seed.
    pub fn combine_row(&self, matrix: &TaggerMatrix, row: usize, seed: u64) -> Result<Tag> {
        let suggestions = &matrix.rows()[row].suggestions;
        let mut rng = row_rng(seed, row);
        match self {
            Combiner::Vote { rule, table } => Ok(rule.vote(suggestions, table, &mut rng)),
            Combiner::TagPair(t) => Ok(t.vote(suggestions, &mut rng)),
            Combiner::StackMbl(s) => s.classify(matrix, row),
            Combiner::StackTree(s) => s.classify(matrix, row),
        }
    }

    /// Combined tags for every row of `matrix`.
    pub fn apply(&self, matrix: &TaggerMatrix, seed: u64) -> Result<Vec<Tag>> {
        if self.num_taggers() != matrix.num_taggers() {
            return Err(Error::InvalidParameter(format!(
                "combiner trained for {} taggers, matrix has {}",
                self.num_taggers(),
                matrix.num_taggers()
            )));
        }
        (0..matrix.len())
            .into_par_iter()
            .map(|row| self.combine_row(matrix, row, seed))
            .collect()
    }
}

/// Trains `method` on `tune` and applies it to `test`.
pub fn combine(
    method: Method,
    params: &CombineParams,
    tune: &TaggerMatrix,
    test: &TaggerMatrix,
    seed: u64,
) -> Result<Vec<Tag>> {
    Combiner::train(method, params, tune)?.apply(test, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for name in ["majority", "totprec", "tagprec", "precrec", "tagpair"] {
            assert_eq!(name.parse::<Method>().unwrap().to_string(), name);
        }
        assert_eq!(
            "stack-tree:tags-context".parse::<Method>().unwrap(),
            Method::StackTree(StackVariant::TagsContext)
        );
        assert!("borda".parse::<Method>().is_err());
    }
}
