//! Seedable synthetic tagged corpora and simulated tagger ensembles.
//!
//! The corpus generator draws tags from a first-order Markov chain with
//! peaked transitions and emits words from per-tag Zipfian vocabularies.
//! Words may belong to several tags, and their spelling (suffix, capitals,
//! hyphens, digits) correlates with their primary tag, so both context and
//! word-shape features carry signal.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index::sample;
use rand::Rng;

use crate::corpus::{MatrixRow, Tag, TaggedCorpus, TaggedToken, TaggerMatrix};
use crate::error::{Error, Result};
use crate::seed::{rng_from_seed, substream};

const TAG_NAMES: &[&str] = &[
    "NN", "IN", "ATI", "JJ", "NNS", "VBD", "AT", "NP", "RB", "CC", "VB", "CS", "DT", "PP3", "VBN",
    "VBG", "MD", "TO", "CD", "BEZ", "HV", "WDT", "QL", "ABN", "AP", "EX", "VBZ", "NPT", "SCOM",
    "SPER",
];

const ONSETS: &[&str] = &[
    "b", "br", "c", "d", "dr", "f", "g", "gl", "h", "k", "l", "m", "n", "p", "pl", "r", "s", "st",
    "t", "tr", "v", "w", "z",
];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ou", "ee"];

#[derive(Clone, Debug)]
pub struct CorpusConfig {
    pub num_tags: usize,
    pub vocab_size: usize,
    /// Probability that a word form is given extra tags.
    pub ambiguity: f64,
    pub min_utterance: usize,
    pub max_utterance: usize,
    /// Zipf exponent of per-tag word frequencies.
    pub zipf: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            num_tags: 20,
            vocab_size: 3000,
            ambiguity: 0.35,
            min_utterance: 4,
            max_utterance: 22,
            zipf: 1.05,
        }
    }
}

/// A fixed synthetic language: tagset, transitions and vocabulary.
#[derive(Clone, Debug)]
pub struct SyntheticLanguage {
    tags: Vec<Tag>,
    start: WeightedIndex<f64>,
    transitions: Vec<WeightedIndex<f64>>,
    words: Vec<String>,
    emissions: Vec<(Vec<usize>, WeightedIndex<f64>)>,
    config: CorpusConfig,
}

fn tag_names(n: usize) -> Vec<Tag> {
    (0..n)
        .map(|i| match TAG_NAMES.get(i) {
            Some(name) => Tag::new(name),
            None => Tag::new(&format!("T{i:03}")),
        })
        .collect()
}

fn peaked_weights<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let u: f64 = rng.gen();
            u.powi(6) + 1e-3
        })
        .collect()
}

fn random_string<R: Rng>(rng: &mut R, syllables: usize) -> String {
    let mut s = String::new();
    for _ in 0..syllables {
        s.push_str(ONSETS[rng.gen_range(0..ONSETS.len())]);
        s.push_str(VOWELS[rng.gen_range(0..VOWELS.len())]);
    }
    s
}

impl SyntheticLanguage {
    pub fn new<R: Rng>(config: CorpusConfig, rng: &mut R) -> Result<SyntheticLanguage> {
        if config.num_tags < 2 || config.vocab_size < config.num_tags {
            return Err(Error::InvalidParameter(
                "need at least 2 tags and one word per tag".into(),
            ));
        }
        if config.min_utterance == 0 || config.min_utterance > config.max_utterance {
            return Err(Error::InvalidParameter("bad utterance length range".into()));
        }
        let n = config.num_tags;
        let tags = tag_names(n);
        let start = WeightedIndex::new(peaked_weights(n, rng)).expect("positive weights");
        let transitions = (0..n)
            .map(|_| WeightedIndex::new(peaked_weights(n, rng)).expect("positive weights"))
            .collect();

        // Spelling conventions per tag.
        let suffixes: Vec<Vec<String>> = (0..n)
            .map(|_| (0..2).map(|_| random_string(rng, 1) + "s").collect())
            .collect();
        let capitalized: Vec<bool> = (0..n).map(|i| i % 7 == 3).collect();
        let numeric: Vec<bool> = (0..n).map(|i| i % 11 == 7).collect();

        let mut words = Vec::with_capacity(config.vocab_size);
        let mut members: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut seen = std::collections::HashSet::new();
        for w in 0..config.vocab_size {
            // Every tag owns at least one word.
            let primary = if w < n { w } else { rng.gen_range(0..n) };
            let form = loop {
                let mut f = if numeric[primary] {
                    format!("{}", rng.gen_range(0..100_000))
                } else {
                    let len = rng.gen_range(1..=3);
                    let stem = random_string(rng, len);
                    let suffix = &suffixes[primary][rng.gen_range(0..2)];
                    format!("{stem}{suffix}")
                };
                if capitalized[primary] {
                    let mut c = f.chars();
                    let first = c.next().unwrap().to_ascii_uppercase();
                    f = std::iter::once(first).chain(c).collect();
                }
                if rng.gen_bool(0.03) {
                    f = format!("{}-{}", random_string(rng, 1), f);
                }
                if seen.insert(f.clone()) {
                    break f;
                }
            };
            words.push(form);
            members[primary].push((w, 1.0));
            if rng.gen_bool(config.ambiguity) {
                let extra = rng.gen_range(1..=2);
                for _ in 0..extra {
                    let t = rng.gen_range(0..n);
                    if t != primary && !members[t].iter().any(|&(x, _)| x == w) {
                        members[t].push((w, rng.gen_range(0.2..1.0)));
                    }
                }
            }
        }

        let emissions = members
            .into_iter()
            .map(|mut m| {
                // Zipfian ranks within each tag, in random order.
                for i in (1..m.len()).rev() {
                    let j = rng.gen_range(0..=i);
                    m.swap(i, j);
                }
                let ids: Vec<usize> = m.iter().map(|&(w, _)| w).collect();
                let weights: Vec<f64> = m
                    .iter()
                    .enumerate()
                    .map(|(rank, &(_, scale))| scale / ((rank + 1) as f64).powf(config.zipf))
                    .collect();
                (
                    ids,
                    WeightedIndex::new(weights).expect("every tag owns a word"),
                )
            })
            .collect();

        Ok(SyntheticLanguage {
            tags,
            start,
            transitions,
            words,
            emissions,
            config,
        })
    }

    pub fn tags(&self) -> &[Tag] {
        &self.tags
    }

    /// Samples exactly `tokens` tokens; the last utterance may be shorter.
    pub fn generate<R: Rng>(&self, tokens: usize, rng: &mut R) -> TaggedCorpus {
        let mut utts = Vec::new();
        let mut remaining = tokens;
        while remaining > 0 {
            let len = rng
                .gen_range(self.config.min_utterance..=self.config.max_utterance)
                .min(remaining);
            let mut utt = Vec::with_capacity(len);
            let mut tag = self.start.sample(rng);
            for i in 0..len {
                if i > 0 {
                    tag = self.transitions[tag].sample(rng);
                }
                let (ids, dist) = &self.emissions[tag];
                let word = ids[dist.sample(rng)];
                utt.push(TaggedToken {
                    token: self.words[word].clone(),
                    tag: self.tags[tag].clone(),
                });
            }
            remaining -= len;
            utts.push(utt);
        }
        TaggedCorpus::new(utts)
    }
}

/// Simulated component taggers with fixed accuracies and independent error
/// positions.
///
/// Each tagger has its own preferred confusion for every gold tag; an error
/// picks that confusion with probability `confusion_bias`, otherwise a
/// uniformly random wrong tag.
#[derive(Clone, Debug)]
pub struct SimulatedEnsemble {
    ids: Vec<String>,
    accuracies: Vec<f64>,
    tags: Vec<Tag>,
    confusions: Vec<BTreeMap<Tag, Tag>>,
    confusion_bias: f64,
}

impl SimulatedEnsemble {
    pub fn new<R: Rng>(
        ids: Vec<String>,
        accuracies: Vec<f64>,
        tags: &[Tag],
        confusion_bias: f64,
        rng: &mut R,
    ) -> Result<SimulatedEnsemble> {
        if ids.len() != accuracies.len() {
            return Err(Error::InvalidParameter(format!(
                "{} tagger ids for {} accuracies",
                ids.len(),
                accuracies.len()
            )));
        }
        if tags.len() < 2 {
            return Err(Error::InvalidParameter("need at least 2 tags".into()));
        }
        if let Some(a) = accuracies.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::InvalidParameter(format!(
                "accuracy {a} outside [0,1]"
            )));
        }
        let confusions = ids
            .iter()
            .map(|_| {
                tags.iter()
                    .map(|g| {
                        let other = loop {
                            let t = &tags[rng.gen_range(0..tags.len())];
                            if t != g {
                                break t.clone();
                            }
                        };
                        (g.clone(), other)
                    })
                    .collect()
            })
            .collect();
        Ok(SimulatedEnsemble {
            ids,
            accuracies,
            tags: tags.to_vec(),
            confusions,
            confusion_bias,
        })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    fn wrong_tag<R: Rng>(&self, tagger: usize, gold: &Tag, rng: &mut R) -> Tag {
        if rng.gen_bool(self.confusion_bias) {
            if let Some(t) = self.confusions[tagger].get(gold) {
                return t.clone();
            }
        }
        loop {
            let t = &self.tags[rng.gen_range(0..self.tags.len())];
            if t != gold {
                return t.clone();
            }
        }
    }

    /// Tags `benchmark` with every simulated tagger. Tagger i errs on exactly
    /// `round((1 - acc_i) * n)` tokens chosen independently of the others.
    pub fn apply<R: Rng>(&self, benchmark: &TaggedCorpus, rng: &mut R) -> TaggerMatrix {
        let n = benchmark.num_tokens();
        let golds = benchmark.gold_tags();
        let mut columns: Vec<Vec<Tag>> = Vec::with_capacity(self.ids.len());
        for (i, &acc) in self.accuracies.iter().enumerate() {
            let errors = (((1.0 - acc) * n as f64).round() as usize).min(n);
            let mut col = golds.clone();
            for pos in sample(rng, n, errors).into_iter() {
                col[pos] = self.wrong_tag(i, &golds[pos], rng);
            }
            columns.push(col);
        }
        let mut k = 0;
        let utts = benchmark
            .utterances()
            .iter()
            .map(|u| {
                u.iter()
                    .map(|tt| {
                        let row = MatrixRow {
                            token: tt.token.clone(),
                            suggestions: columns.iter().map(|c| c[k].clone()).collect(),
                            gold: Some(tt.tag.clone()),
                        };
                        k += 1;
                        row
                    })
                    .collect()
            })
            .collect();
        TaggerMatrix::new(self.ids.clone(), utts).expect("simulated columns are aligned")
    }
}

/// Default tagger ids `t1`, `t2`, …
pub fn default_ids(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("t{i}")).collect()
}

/// Share of simulated errors that go to the tagger's preferred confusion.
pub const DEFAULT_CONFUSION_BIAS: f64 = 0.6;

/// Simulation parameters shared by the library helpers and the CLI.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub corpus: CorpusConfig,
    pub ids: Vec<String>,
    pub accuracies: Vec<f64>,
    pub confusion_bias: f64,
    pub seed: u64,
}

impl Simulation {
    pub fn new(accuracies: Vec<f64>, seed: u64) -> Simulation {
        Simulation {
            corpus: CorpusConfig::default(),
            ids: default_ids(accuracies.len()),
            accuracies,
            confusion_bias: DEFAULT_CONFUSION_BIAS,
            seed,
        }
    }

    fn world(&self) -> Result<(SyntheticLanguage, SimulatedEnsemble)> {
        let lang = SyntheticLanguage::new(
            self.corpus.clone(),
            &mut rng_from_seed(substream(self.seed, "language")),
        )?;
        let ens = SimulatedEnsemble::new(
            self.ids.clone(),
            self.accuracies.clone(),
            lang.tags(),
            self.confusion_bias,
            &mut rng_from_seed(substream(self.seed, "ensemble")),
        )?;
        Ok((lang, ens))
    }

    /// One benchmark of `tokens` tokens and the ensemble's matrix over it.
    pub fn benchmark(&self, tokens: usize) -> Result<(TaggedCorpus, TaggerMatrix)> {
        let (lang, ens) = self.world()?;
        let corpus = lang.generate(
            tokens,
            &mut rng_from_seed(substream(self.seed, "benchmark")),
        );
        let matrix = ens.apply(
            &corpus,
            &mut rng_from_seed(substream(self.seed, "benchmark-errors")),
        );
        Ok((corpus, matrix))
    }

    /// Independent Tune and Test matrices drawn from the same language and
    /// the same ensemble.
    pub fn tune_test(
        &self,
        tune_tokens: usize,
        test_tokens: usize,
    ) -> Result<(TaggerMatrix, TaggerMatrix)> {
        let (lang, ens) = self.world()?;
        let draw = |tokens, label: &str| {
            let corpus = lang.generate(tokens, &mut rng_from_seed(substream(self.seed, label)));
            ens.apply(
                &corpus,
                &mut rng_from_seed(substream(self.seed, &format!("{label}-errors"))),
            )
        };
        Ok((draw(tune_tokens, "tune"), draw(test_tokens, "test")))
    }
}
