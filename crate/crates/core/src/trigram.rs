//! Tagger T: trigram context model with Viterbi decoding.
//!
//! A tag sequence is scored as `Π_i P(t_i | w_i) · P̂(t_i | t_{i-1}, t_{i-2})`
//! in log space. The lexical term comes from Train relative frequencies for
//! known words and from an [`UnknownWordProposer`] otherwise. The context
//! term linearly interpolates trigram, bigram and unigram relative
//! frequencies.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Lexicon, Tag, TaggedCorpus};
use crate::error::{Error, Result};
use crate::mbl::UnknownWordGuesser;

/// Pseudo-tag padding the two positions before an utterance.
pub const BOUNDARY_TAG: &str = "<bos>";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lambdas {
    pub trigram: f64,
    pub bigram: f64,
    pub unigram: f64,
}

impl Default for Lambdas {
    fn default() -> Self {
        Lambdas {
            trigram: 0.7,
            bigram: 0.2,
            unigram: 0.1,
        }
    }
}

impl Lambdas {
    pub fn new(trigram: f64, bigram: f64, unigram: f64) -> Result<Lambdas> {
        let l = Lambdas {
            trigram,
            bigram,
            unigram,
        };
        if [trigram, bigram, unigram]
            .iter()
            .any(|x| !(0.0..=1.0).contains(x))
            || (trigram + bigram + unigram - 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidParameter(format!(
                "interpolation weights {trigram},{bigram},{unigram} must lie in [0,1] and sum to 1"
            )));
        }
        Ok(l)
    }

    /// Parses `"0.7,0.2,0.1"`.
    pub fn parse(s: &str) -> Result<Lambdas> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidParameter(format!("lambda '{s}': {e}")))?;
        match parts.as_slice() {
            [a, b, c] => Lambdas::new(*a, *b, *c),
            _ => Err(Error::InvalidParameter(format!(
                "lambda '{s}' needs three comma-separated values"
            ))),
        }
    }
}

/// Source of P(t | w) for words missing from the lexicon.
pub trait UnknownWordProposer {
    /// Normalized tag distribution for `tokens[pos]`.
    fn propose(&self, tokens: &[&str], pos: usize) -> Result<Vec<(Tag, f64)>>;
}

impl<F> UnknownWordProposer for F
where
    F: Fn(&[&str], usize) -> Vec<(Tag, f64)>,
{
    fn propose(&self, tokens: &[&str], pos: usize) -> Result<Vec<(Tag, f64)>> {
        Ok(self(tokens, pos))
    }
}

/// Spreads probability evenly over a fixed tag list.
#[derive(Clone, Debug)]
pub struct UniformProposer(pub Vec<Tag>);

impl UnknownWordProposer for UniformProposer {
    fn propose(&self, _tokens: &[&str], _pos: usize) -> Result<Vec<(Tag, f64)>> {
        let p = 1.0 / self.0.len() as f64;
        Ok(self.0.iter().map(|t| (t.clone(), p)).collect())
    }
}

impl UnknownWordGuesser {
    /// Best guess for the tag at `pos`, used as left context for the next
    /// unknown word: the modal lexicon tag, or a recursive guess.
    fn left_guess(&self, tokens: &[&str], pos: usize) -> Result<Tag> {
        if let Some(t) = self.lexicon().modal_tag(tokens[pos]) {
            return Ok(t.clone());
        }
        let left = match pos.checked_sub(1) {
            Some(p) => Some(self.left_guess(tokens, p)?),
            None => None,
        };
        Ok(self.guess(tokens, pos, left.as_ref())?.label)
    }
}

impl UnknownWordProposer for UnknownWordGuesser {
    fn propose(&self, tokens: &[&str], pos: usize) -> Result<Vec<(Tag, f64)>> {
        let left = match pos.checked_sub(1) {
            Some(p) => Some(self.left_guess(tokens, p)?),
            None => None,
        };
        Ok(self.guess(tokens, pos, left.as_ref())?.distribution)
    }
}

type Counts = BTreeMap<Tag, u64>;

/// Raw tag n-gram counts plus the lexicon.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrigramModel {
    lexicon: Lexicon,
    lambdas: Lambdas,
    unigrams: Counts,
    total: u64,
    /// t_{i-1} → t_i → count
    bigrams: BTreeMap<Tag, Counts>,
    /// t_{i-2} → t_{i-1} → t_i → count
    trigrams: BTreeMap<Tag, BTreeMap<Tag, Counts>>,
}

fn relative(counts: Option<&Counts>, tag: &Tag) -> f64 {
    match counts {
        Some(c) => {
            let total: u64 = c.values().sum();
            if total == 0 {
                0.0
            } else {
                c.get(tag).copied().unwrap_or(0) as f64 / total as f64
            }
        }
        None => 0.0,
    }
}

impl TrigramModel {
    pub fn train(train: &TaggedCorpus, lambdas: Lambdas) -> Result<TrigramModel> {
        if train.is_empty() {
            return Err(Error::EmptyInput);
        }
        let boundary = Tag::new(BOUNDARY_TAG);
        let mut m = TrigramModel {
            lexicon: Lexicon::from_corpus(train),
            lambdas,
            unigrams: BTreeMap::new(),
            total: 0,
            bigrams: BTreeMap::new(),
            trigrams: BTreeMap::new(),
        };
        for utt in train.utterances() {
            let mut prev2 = boundary.clone();
            let mut prev1 = boundary.clone();
            for tt in utt {
                let t = &tt.tag;
                *m.unigrams.entry(t.clone()).or_insert(0) += 1;
                m.total += 1;
                *m.bigrams
                    .entry(prev1.clone())
                    .or_default()
                    .entry(t.clone())
                    .or_insert(0) += 1;
                *m.trigrams
                    .entry(prev2.clone())
                    .or_default()
                    .entry(prev1.clone())
                    .or_default()
                    .entry(t.clone())
                    .or_insert(0) += 1;
                prev2 = std::mem::replace(&mut prev1, t.clone());
            }
        }
        Ok(m)
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn lambdas(&self) -> Lambdas {
        self.lambdas
    }

    pub fn with_lambdas(mut self, lambdas: Lambdas) -> TrigramModel {
        self.lambdas = lambdas;
        self
    }

    /// Tags seen in Train, in lexicographic order.
    pub fn tags(&self) -> impl Iterator<Item = &Tag> {
        self.unigrams.keys()
    }

    /// Raw f(t | t_{i-2}, t_{i-1}).
    pub fn trigram_freq(&self, prev2: &Tag, prev1: &Tag, tag: &Tag) -> f64 {
        relative(self.trigrams.get(prev2).and_then(|m| m.get(prev1)), tag)
    }

    /// Raw f(t | t_{i-1}).
    pub fn bigram_freq(&self, prev1: &Tag, tag: &Tag) -> f64 {
        relative(self.bigrams.get(prev1), tag)
    }

    /// Raw f(t).
    pub fn unigram_freq(&self, tag: &Tag) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.unigrams.get(tag).copied().unwrap_or(0) as f64 / self.total as f64
        }
    }

    /// Stored raw trigram distribution for a context, if observed.
    pub fn trigram_distribution(&self, prev2: &Tag, prev1: &Tag) -> Option<Vec<(Tag, f64)>> {
        let c = self.trigrams.get(prev2)?.get(prev1)?;
        let total: u64 = c.values().sum();
        Some(
            c.iter()
                .map(|(t, &n)| (t.clone(), n as f64 / total as f64))
                .collect(),
        )
    }

    /// Every observed trigram context.
    pub fn trigram_contexts(&self) -> Vec<(Tag, Tag)> {
        self.trigrams
            .iter()
            .flat_map(|(a, m)| m.keys().map(move |b| (a.clone(), b.clone())))
            .collect()
    }

    /// Interpolated P̂(t | t_{i-2}, t_{i-1}).
    pub fn context_prob(&self, prev2: &Tag, prev1: &Tag, tag: &Tag) -> f64 {
        let l = self.lambdas;
        l.trigram * self.trigram_freq(prev2, prev1, tag)
            + l.bigram * self.bigram_freq(prev1, tag)
            + l.unigram * self.unigram_freq(tag)
    }

    /// Candidate tags with P(t | w), sorted by tag. Known words are limited
    /// to their lexicon tags, unknown words to tags the proposer gives
    /// non-zero probability.
    pub fn candidates<P: UnknownWordProposer + ?Sized>(
        &self,
        tokens: &[&str],
        pos: usize,
        proposer: &P,
    ) -> Result<Vec<(Tag, f64)>> {
        let mut c = match self.lexicon.distribution(tokens[pos]) {
            Some(d) => d,
            None => proposer
                .propose(tokens, pos)?
                .into_iter()
                .filter(|(_, p)| *p > 0.0)
                .collect(),
        };
        if c.is_empty() {
            return Err(Error::NoCandidates(tokens[pos].to_owned()));
        }
        c.sort_by(|a, b| a.0.cmp(&b.0));
        c.dedup_by(|a, b| a.0 == b.0);
        Ok(c)
    }

    /// Most probable tag sequence for one utterance.
    ///
    /// Ties are broken towards the lexicographically smaller tag at every
    /// backpointer and, for the final state, towards the smaller last tag
    /// and then the smaller second-to-last tag.
    pub fn viterbi<P: UnknownWordProposer + ?Sized>(
        &self,
        tokens: &[&str],
        proposer: &P,
    ) -> Result<Vec<Tag>> {
        if tokens.is_empty() {
            return Ok(Vec::new());
        }
        let boundary = vec![(Tag::new(BOUNDARY_TAG), 0.0)];
        let cands: Vec<Vec<(Tag, f64)>> = (0..tokens.len())
            .map(|i| self.candidates(tokens, i, proposer))
            .collect::<Result<_>>()?;
        let layer = |i: isize| -> &Vec<(Tag, f64)> {
            if i < 0 {
                &boundary
            } else {
                &cands[i as usize]
            }
        };

        // delta[a][b]: best log score with t_{i-1} = a, t_i = b.
        let mut delta: Vec<Vec<f64>> = vec![vec![0.0]];
        let mut back: Vec<Vec<Vec<usize>>> = Vec::with_capacity(tokens.len());
        for i in 0..tokens.len() as isize {
            let pp = layer(i - 2);
            let p = layer(i - 1);
            let cur = layer(i);
            let mut next = vec![vec![f64::NEG_INFINITY; cur.len()]; p.len()];
            let mut bp = vec![vec![0usize; cur.len()]; p.len()];
            for (a, (ta, _)) in p.iter().enumerate() {
                for (b, (tb, lex)) in cur.iter().enumerate() {
                    let mut best = f64::NEG_INFINITY;
                    let mut arg = 0;
                    for (c, (tc, _)) in pp.iter().enumerate() {
                        let step = self.context_prob(tc, ta, tb).ln() + lex.ln();
                        let score = delta[c][a] + step;
                        if c == 0 || score > best {
                            best = score;
                            arg = c;
                        }
                    }
                    next[a][b] = best;
                    bp[a][b] = arg;
                }
            }
            delta = next;
            back.push(bp);
        }

        let n = tokens.len();
        let last = layer(n as isize - 1);
        let prev = layer(n as isize - 2);
        let (mut a, mut b) = (0, 0);
        let mut best = f64::NEG_INFINITY;
        let mut first = true;
        for bi in 0..last.len() {
            for (ai, row) in delta.iter().enumerate().take(prev.len()) {
                if first || row[bi] > best {
                    best = row[bi];
                    a = ai;
                    b = bi;
                    first = false;
                }
            }
        }

        let mut idx = vec![0usize; n];
        idx[n - 1] = b;
        if n >= 2 {
            idx[n - 2] = a;
        }
        for i in (2..n).rev() {
            idx[i - 2] = back[i][idx[i - 1]][idx[i]];
        }
        Ok(idx
            .iter()
            .enumerate()
            .map(|(i, &k)| cands[i][k].0.clone())
            .collect())
    }
}

/// Tagger T: the trigram model plus its unknown-word guesser.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrigramTagger {
    model: TrigramModel,
    guesser: UnknownWordGuesser,
}

impl TrigramTagger {
    pub fn train(train: &TaggedCorpus, lambdas: Lambdas) -> Result<TrigramTagger> {
        Ok(TrigramTagger {
            model: TrigramModel::train(train, lambdas)?,
            guesser: UnknownWordGuesser::train(train)?,
        })
    }

    pub fn model(&self) -> &TrigramModel {
        &self.model
    }

    pub fn tag(&self, tokens: &[&str]) -> Result<Vec<Tag>> {
        self.model.viterbi(tokens, &self.guesser)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<TrigramTagger> {
        Ok(serde_json::from_str(text)?)
    }
}
