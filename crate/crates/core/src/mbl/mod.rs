//! Memory-based learning over symbolic features.
//!
//! A [`CaseBase`] stores training cases and answers nearest-set queries under
//! the (optionally Information-Gain weighted) overlap metric
//! `d(x, y) = Σ_f w_f · [x_f ≠ y_f]`. The answer is the label distribution of
//! *all* stored cases at minimum distance.

mod index;
mod tagger;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Tag;
use crate::error::{Error, Result};

pub use tagger::{
    known_features, unknown_features, MbTagger, UnknownWordGuesser, BOUNDARY_LEFT, BOUNDARY_RIGHT,
    KNOWN_SCHEMA, RARE_TOKEN_MAX_FREQ, SUFFIX_PAD, UNKNOWN_SCHEMA,
};

use index::CaseIndex;

/// Distances closer than this are treated as equal.
pub const DISTANCE_EPSILON: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Case {
    pub features: Vec<String>,
    pub label: Tag,
}

impl Case {
    pub fn new<S: AsRef<str>>(features: &[S], label: &str) -> Case {
        Case {
            features: features.iter().map(|s| s.as_ref().to_owned()).collect(),
            label: Tag::new(label),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    /// Every mismatching feature costs 1.
    Overlap,
    /// Mismatches cost the feature's Information Gain.
    InformationGain,
}

fn entropy<'a, I: IntoIterator<Item = &'a u64>>(counts: I) -> f64 {
    let counts: Vec<u64> = counts.into_iter().copied().collect();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum()
}

/// Information Gain of every feature, in bits:
/// `H(labels) − Σ_v P(f = v) · H(labels | f = v)`.
pub fn information_gain(cases: &[Case]) -> Vec<f64> {
    let Some(first) = cases.first() else {
        return Vec::new();
    };
    let arity = first.features.len();
    let mut label_counts: BTreeMap<&Tag, u64> = BTreeMap::new();
    for c in cases {
        *label_counts.entry(&c.label).or_insert(0) += 1;
    }
    let h = entropy(label_counts.values());
    let n = cases.len() as f64;
    (0..arity)
        .map(|f| {
            let mut by_value: BTreeMap<&str, BTreeMap<&Tag, u64>> = BTreeMap::new();
            for c in cases {
                *by_value
                    .entry(c.features[f].as_str())
                    .or_default()
                    .entry(&c.label)
                    .or_insert(0) += 1;
            }
            let conditional: f64 = by_value
                .values()
                .map(|labels| {
                    let nv: u64 = labels.values().sum();
                    nv as f64 / n * entropy(labels.values())
                })
                .sum();
            (h - conditional).clamp(0.0, h)
        })
        .collect()
}

/// Result of a nearest-set query.
#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub label: Tag,
    /// Normalized label counts of the nearest set, sorted by tag.
    pub distribution: Vec<(Tag, f64)>,
    pub distance: f64,
    /// Number of stored cases in the nearest set.
    pub support: u64,
}

/// Serializable form of a case base; the index is rebuilt on load.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CaseBaseData {
    pub schema: Vec<String>,
    pub metric: Metric,
    pub cases: Vec<Case>,
}

/// Stored cases with per-feature Information Gain weights.
#[derive(Clone, Debug)]
pub struct CaseBase {
    schema: Vec<String>,
    metric: Metric,
    weights: Vec<f64>,
    label_counts: BTreeMap<Tag, u64>,
    cases: Vec<Case>,
    index: CaseIndex,
}

impl CaseBase {
    pub fn build(schema: Vec<String>, cases: Vec<Case>, metric: Metric) -> Result<CaseBase> {
        if cases.is_empty() {
            return Err(Error::EmptyCaseBase);
        }
        if let Some(c) = cases.iter().find(|c| c.features.len() != schema.len()) {
            return Err(Error::Arity {
                expected: schema.len(),
                got: c.features.len(),
            });
        }
        let weights = information_gain(&cases);
        let mut label_counts = BTreeMap::new();
        for c in &cases {
            *label_counts.entry(c.label.clone()).or_insert(0) += 1;
        }
        let index = CaseIndex::build(&cases, &weights);
        Ok(CaseBase {
            schema,
            metric,
            weights,
            label_counts,
            cases,
            index,
        })
    }

    pub fn from_data(data: CaseBaseData) -> Result<CaseBase> {
        CaseBase::build(data.schema, data.cases, data.metric)
    }

    pub fn to_data(&self) -> CaseBaseData {
        CaseBaseData {
            schema: self.schema.clone(),
            metric: self.metric,
            cases: self.cases.clone(),
        }
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub fn arity(&self) -> usize {
        self.schema.len()
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// Information Gain weights, whatever the metric.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights actually used by the distance function.
    pub fn effective_weights(&self) -> Vec<f64> {
        match self.metric {
            Metric::Overlap => vec![1.0; self.arity()],
            Metric::InformationGain => self.weights.clone(),
        }
    }

    pub fn cases(&self) -> &[Case] {
        &self.cases
    }

    pub fn label_counts(&self) -> &BTreeMap<Tag, u64> {
        &self.label_counts
    }

    /// Returns a copy using another metric.
    pub fn with_metric(&self, metric: Metric) -> CaseBase {
        CaseBase {
            metric,
            ..self.clone()
        }
    }

    /// Modal label of `counts`; ties go to the more frequent label overall,
    /// then to the lexicographically smaller one.
    pub fn pick_label(&self, counts: &BTreeMap<Tag, u64>) -> Tag {
        counts
            .iter()
            .max_by(|a, b| {
                a.1.cmp(b.1)
                    .then_with(|| {
                        let ga = self.label_counts.get(a.0).copied().unwrap_or(0);
                        let gb = self.label_counts.get(b.0).copied().unwrap_or(0);
                        ga.cmp(&gb)
                    })
                    .then_with(|| b.0.cmp(a.0))
            })
            .map(|(t, _)| t.clone())
            .expect("non-empty nearest set")
    }

    pub fn classify<S: AsRef<str>>(&self, instance: &[S]) -> Result<Classification> {
        if instance.len() != self.arity() {
            return Err(Error::Arity {
                expected: self.arity(),
                got: instance.len(),
            });
        }
        let weights = self.effective_weights();
        let (distance, counts) = self.index.nearest(instance, &weights);
        let support: u64 = counts.values().sum();
        let label = self.pick_label(&counts);
        let distribution = counts
            .iter()
            .map(|(t, &c)| (t.clone(), c as f64 / support as f64))
            .collect();
        Ok(Classification {
            label,
            distribution,
            distance,
            support,
        })
    }
}
