//! Second-stage classifiers trained on the suggestions of the component
//! taggers.

mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Tag, TaggerMatrix};
use crate::error::{Error, Result};
use crate::mbl::{Case, CaseBase, Metric};

pub use tree::{
    pessimistic_error_rate, DecisionTree, TreeNode, DEFAULT_CONFIDENCE, MIN_SPLIT_SUPPORT,
};

/// Feature value before the first token of an utterance.
pub const CONTEXT_START: &str = "<s>";
/// Feature value after the last token of an utterance.
pub const CONTEXT_END: &str = "</s>";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StackVariant {
    /// The N suggestions.
    Tags,
    /// The N suggestions and the word.
    TagsWord,
    /// Suggestions at the previous, current and next position (3N).
    TagsContext,
}

impl StackVariant {
    pub fn arity(self, taggers: usize) -> usize {
        match self {
            StackVariant::Tags => taggers,
            StackVariant::TagsWord => taggers + 1,
            StackVariant::TagsContext => 3 * taggers,
        }
    }

    /// Overlap for Tags and Tags+Word; Information-Gain weighting for
    /// Tags+Context.
    pub fn metric(self) -> Metric {
        match self {
            StackVariant::TagsContext => Metric::InformationGain,
            _ => Metric::Overlap,
        }
    }

    pub fn schema(self, tagger_ids: &[String]) -> Vec<String> {
        let ids = tagger_ids.iter();
        match self {
            StackVariant::Tags => ids.cloned().collect(),
            StackVariant::TagsWord => ids.cloned().chain(std::iter::once("word".into())).collect(),
            StackVariant::TagsContext => tagger_ids
                .iter()
                .map(|i| format!("{i}-1"))
                .chain(tagger_ids.iter().cloned())
                .chain(tagger_ids.iter().map(|i| format!("{i}+1")))
                .collect(),
        }
    }
}

impl fmt::Display for StackVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StackVariant::Tags => "tags",
            StackVariant::TagsWord => "tags-word",
            StackVariant::TagsContext => "tags-context",
        })
    }
}

impl FromStr for StackVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<StackVariant> {
        match s {
            "tags" => Ok(StackVariant::Tags),
            "tags-word" => Ok(StackVariant::TagsWord),
            "tags-context" => Ok(StackVariant::TagsContext),
            _ => Err(Error::InvalidParameter(format!(
                "unknown stack variant '{s}'"
            ))),
        }
    }
}

/// Second-stage features of one matrix row.
pub fn stack_features(matrix: &TaggerMatrix, row: usize, variant: StackVariant) -> Vec<String> {
    let r = &matrix.rows()[row];
    let focus = r.suggestions.iter().map(Tag::to_string);
    match variant {
        StackVariant::Tags => focus.collect(),
        StackVariant::TagsWord => focus.chain(std::iter::once(r.token.clone())).collect(),
        StackVariant::TagsContext => {
            let n = matrix.num_taggers();
            let side = |other: Option<&crate::corpus::MatrixRow>, pad: &str| -> Vec<String> {
                match other {
                    Some(o) => o.suggestions.iter().map(Tag::to_string).collect(),
                    None => vec![pad.to_owned(); n],
                }
            };
            let mut f = side(matrix.prev_in_utterance(row), CONTEXT_START);
            f.extend(focus);
            f.extend(side(matrix.next_in_utterance(row), CONTEXT_END));
            f
        }
    }
}

/// One case per token, labeled with the gold tag.
pub fn build_stack_cases(matrix: &TaggerMatrix, variant: StackVariant) -> Result<Vec<Case>> {
    let golds = matrix.golds()?;
    Ok(golds
        .into_iter()
        .enumerate()
        .map(|(row, gold)| Case {
            features: stack_features(matrix, row, variant),
            label: gold.clone(),
        })
        .collect())
}

/// Fraction of rows whose suggestions are not unanimous.
pub fn disagreement_rate(matrix: &TaggerMatrix) -> f64 {
    if matrix.is_empty() {
        return 0.0;
    }
    let split = matrix
        .rows()
        .iter()
        .filter(|r| r.suggestions.iter().any(|s| s != &r.suggestions[0]))
        .count();
    split as f64 / matrix.len() as f64
}

/// Memory-based second stage.
#[derive(Clone, Debug)]
pub struct MblStacker {
    variant: StackVariant,
    taggers: usize,
    base: CaseBase,
}

impl MblStacker {
    pub fn train(tune: &TaggerMatrix, variant: StackVariant) -> Result<MblStacker> {
        let cases = build_stack_cases(tune, variant)?;
        let base = CaseBase::build(variant.schema(tune.tagger_ids()), cases, variant.metric())?;
        Ok(MblStacker {
            variant,
            taggers: tune.num_taggers(),
            base,
        })
    }

    pub fn variant(&self) -> StackVariant {
        self.variant
    }

    pub fn num_taggers(&self) -> usize {
        self.taggers
    }

    pub fn base(&self) -> &CaseBase {
        &self.base
    }

    pub fn classify_instance<S: AsRef<str>>(&self, instance: &[S]) -> Result<Tag> {
        Ok(self.base.classify(instance)?.label)
    }

    pub fn classify(&self, matrix: &TaggerMatrix, row: usize) -> Result<Tag> {
        self.classify_instance(&stack_features(matrix, row, self.variant))
    }
}

/// Decision-tree second stage.
#[derive(Clone, Debug)]
pub struct TreeStacker {
    variant: StackVariant,
    taggers: usize,
    tree: DecisionTree,
}

impl TreeStacker {
    /// Rejects Tags+Word: the word feature has far too many values for
    /// multi-way splits.
    pub fn train(
        tune: &TaggerMatrix,
        variant: StackVariant,
        confidence: Option<f64>,
    ) -> Result<TreeStacker> {
        if variant == StackVariant::TagsWord {
            return Err(Error::UnsupportedVariant(
                "tags-word cannot be learned by the decision tree: too many feature values".into(),
            ));
        }
        let cases = build_stack_cases(tune, variant)?;
        Ok(TreeStacker {
            variant,
            taggers: tune.num_taggers(),
            tree: DecisionTree::train(&cases, confidence)?,
        })
    }

    pub fn variant(&self) -> StackVariant {
        self.variant
    }

    pub fn num_taggers(&self) -> usize {
        self.taggers
    }

    pub fn tree(&self) -> &DecisionTree {
        &self.tree
    }

    pub fn classify(&self, matrix: &TaggerMatrix, row: usize) -> Result<Tag> {
        self.tree
            .classify(&stack_features(matrix, row, self.variant))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::MatrixRow;

    fn matrix() -> TaggerMatrix {
        let row = |s: [&str; 4], g: &str| MatrixRow {
            token: format!("w{g}"),
            suggestions: s.iter().map(|x| Tag::new(x)).collect(),
            gold: Some(Tag::new(g)),
        };
        let u1 = vec![
            row(["X", "X", "X", "X"], "X"),
            row(["X", "Y", "Y", "Y"], "Y"),
            row(["Z", "Z", "X", "Z"], "Z"),
        ];
        let u2 = (0..7).map(|_| row(["X", "X", "X", "X"], "X")).collect();
        TaggerMatrix::new((0..4).map(|i| format!("t{i}")).collect(), vec![u1, u2]).unwrap()
    }

    #[test]
    fn tags_cases() {
        let cases = build_stack_cases(&matrix(), StackVariant::Tags).unwrap();
        assert_eq!(cases.len(), 10);
        assert!(cases.iter().all(|c| c.features.len() == 4));
    }

    #[test]
    fn context_cases_pad_edges() {
        let m = matrix();
        let cases = build_stack_cases(&m, StackVariant::TagsContext).unwrap();
        assert!(cases.iter().all(|c| c.features.len() == 12));
        assert!(cases[0].features[..4].iter().all(|f| f == CONTEXT_START));
        assert_eq!(&cases[0].features[8..], &["X", "Y", "Y", "Y"]);
        assert!(cases[2].features[8..].iter().all(|f| f == CONTEXT_END));
        assert!(cases[3].features[..4].iter().all(|f| f == CONTEXT_START));
    }

    #[test]
    fn word_variant_arity() {
        let cases = build_stack_cases(&matrix(), StackVariant::TagsWord).unwrap();
        assert_eq!(cases[1].features, vec!["X", "Y", "Y", "Y", "wY"]);
    }

    #[test]
    fn disagreement() {
        assert!((disagreement_rate(&matrix()) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn mbl_stacker_recalls_training_cases() {
        let m = matrix();
        for v in [
            StackVariant::Tags,
            StackVariant::TagsWord,
            StackVariant::TagsContext,
        ] {
            let s = MblStacker::train(&m, v).unwrap();
            for (row, g) in m.golds().unwrap().into_iter().enumerate() {
                assert_eq!(&s.classify(&m, row).unwrap(), g, "{v}");
            }
        }
    }

    #[test]
    fn tree_rejects_tags_word() {
        assert!(matches!(
            TreeStacker::train(&matrix(), StackVariant::TagsWord, Some(0.25)),
            Err(Error::UnsupportedVariant(_))
        ));
    }

    #[test]
    fn variant_names() {
        for v in [
            StackVariant::Tags,
            StackVariant::TagsWord,
            StackVariant::TagsContext,
        ] {
            assert_eq!(v.to_string().parse::<StackVariant>().unwrap(), v);
        }
        assert!("words".parse::<StackVariant>().is_err());
    }
}
