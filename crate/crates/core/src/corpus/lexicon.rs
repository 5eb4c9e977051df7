use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Tag, TaggedCorpus};

/// Ambiguity-class symbol for tokens missing from the lexicon.
pub const UNKNOWN_CLASS: &str = "?";

/// Token → tag counts collected from Train.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct Lexicon {
    entries: BTreeMap<String, BTreeMap<Tag, u64>>,
    tag_counts: BTreeMap<Tag, u64>,
    total: u64,
}

/// Tokens of a corpus that are new with respect to a lexicon.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Novelty {
    pub total: usize,
    pub unknown_tokens: usize,
    pub known_with_new_tag: usize,
}

impl Lexicon {
    pub fn from_corpus(train: &TaggedCorpus) -> Lexicon {
        let mut lex = Lexicon::default();
        for tt in train.tokens() {
            lex.add(&tt.token, &tt.tag);
        }
        lex
    }

    pub fn add(&mut self, token: &str, tag: &Tag) {
        *self
            .entries
            .entry(token.to_owned())
            .or_default()
            .entry(tag.clone())
            .or_insert(0) += 1;
        *self.tag_counts.entry(tag.clone()).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn is_known(&self, token: &str) -> bool {
        self.entries.contains_key(token)
    }

    pub fn tags(&self, token: &str) -> Option<&BTreeMap<Tag, u64>> {
        self.entries.get(token)
    }

    pub fn token_freq(&self, token: &str) -> u64 {
        self.entries.get(token).map_or(0, |m| m.values().sum())
    }

    pub fn count(&self, token: &str, tag: &str) -> u64 {
        self.entries
            .get(token)
            .and_then(|m| m.get(tag))
            .copied()
            .unwrap_or(0)
    }

    /// P(tag | token) as a relative frequency; `None` for unknown tokens.
    pub fn prob(&self, token: &str, tag: &str) -> Option<f64> {
        let freq = self.token_freq(token);
        if freq == 0 {
            return None;
        }
        Some(self.count(token, tag) as f64 / freq as f64)
    }

    /// Full P(· | token), tags in lexicographic order.
    pub fn distribution(&self, token: &str) -> Option<Vec<(Tag, f64)>> {
        let tags = self.entries.get(token)?;
        let freq: u64 = tags.values().sum();
        Some(
            tags.iter()
                .map(|(t, &c)| (t.clone(), c as f64 / freq as f64))
                .collect(),
        )
    }

    /// Most frequent Train tag of `token`; ties go to the lexicographically
    /// smallest tag.
    pub fn modal_tag(&self, token: &str) -> Option<&Tag> {
        let tags = self.entries.get(token)?;
        let mut best: Option<(&Tag, u64)> = None;
        for (t, &c) in tags {
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((t, c));
            }
        }
        best.map(|(t, _)| t)
    }

    /// Sorted tag set of `token` rendered as one symbol, e.g. `JJ|NN`.
    pub fn ambiguity_class(&self, token: &str) -> String {
        match self.entries.get(token) {
            Some(tags) => {
                let names: Vec<&str> = tags.keys().map(Tag::as_str).collect();
                names.join("|")
            }
            None => UNKNOWN_CLASS.to_owned(),
        }
    }

    pub fn tag_counts(&self) -> &BTreeMap<Tag, u64> {
        &self.tag_counts
    }

    pub fn tag_count(&self, tag: &str) -> u64 {
        self.tag_counts.get(tag).copied().unwrap_or(0)
    }

    pub fn total_tokens(&self) -> u64 {
        self.total
    }

    pub fn num_types(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &BTreeMap<Tag, u64>)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// The `k` most frequent tags, by count then name.
    pub fn most_frequent_tags(&self, k: usize) -> Vec<Tag> {
        let mut tags: Vec<(&Tag, u64)> = self.tag_counts.iter().map(|(t, &c)| (t, c)).collect();
        tags.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        tags.into_iter().take(k).map(|(t, _)| t.clone()).collect()
    }

    pub fn most_frequent_tag(&self) -> Option<Tag> {
        self.most_frequent_tags(1).pop()
    }

    /// Average number of distinct tags per word form.
    pub fn mean_ambiguity(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        let sum: usize = self.entries.values().map(BTreeMap::len).sum();
        sum as f64 / self.entries.len() as f64
    }

    /// Counts tokens of `corpus` unseen in the lexicon and known tokens whose
    /// tag was never seen with them.
    pub fn novelty(&self, corpus: &TaggedCorpus) -> Novelty {
        let mut n = Novelty::default();
        for tt in corpus.tokens() {
            n.total += 1;
            match self.entries.get(&tt.token) {
                None => n.unknown_tokens += 1,
                Some(tags) if !tags.contains_key(&tt.tag) => n.known_with_new_tag += 1,
                Some(_) => {}
            }
        }
        n
    }
}
