//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tagcombo::corpus::MatrixRow;
use tagcombo::mbl::{Case, CaseBase, Metric};
use tagcombo::pairwise::PairTable;
use tagcombo::stacker::DecisionTree;
use tagcombo::trigram::{Lambdas, TrigramModel, BOUNDARY_TAG};
use tagcombo::{Tag, TaggedCorpus, TaggedToken, TaggerMatrix};

pub fn t(s: &str) -> Tag {
    Tag::new(s)
}

pub fn tags(s: &str) -> Vec<Tag> {
    s.split(',').map(Tag::new).collect()
}

// ---------------------------------------------------------------- Viterbi

/// A small random trigram model with a sentence to decode. Unknown words
/// get a fixed random distribution from `unknown`.
pub struct ViterbiInstance {
    pub model: TrigramModel,
    pub tokens: Vec<String>,
    pub unknown: HashMap<String, Vec<(Tag, f64)>>,
}

impl ViterbiInstance {
    pub fn random(rng: &mut ChaCha8Rng) -> ViterbiInstance {
        let k = rng.gen_range(2..=6);
        let tagset: Vec<Tag> = ["A", "B", "C", "D", "E", "F"][..k]
            .iter()
            .map(|s| t(s))
            .collect();
        let vocab: Vec<(String, Vec<Tag>)> = (0..rng.gen_range(3..=7))
            .map(|w| {
                let m = rng.gen_range(1..=k);
                let mut ts: Vec<Tag> = tagset.choose_multiple(rng, m).cloned().collect();
                ts.sort();
                (format!("w{w}"), ts)
            })
            .collect();
        let mut utts = Vec::new();
        let mut seen: Vec<Tag> = Vec::new();
        for _ in 0..rng.gen_range(3..=10) {
            let len = rng.gen_range(1..=6);
            let u: Vec<TaggedToken> = (0..len)
                .map(|_| {
                    let (w, ts) = vocab.choose(rng).unwrap();
                    let tag = ts.choose(rng).unwrap();
                    seen.push(tag.clone());
                    TaggedToken::new(w, tag.as_str())
                })
                .collect();
            utts.push(u);
        }
        let a: f64 = rng.gen_range(0.05..1.0);
        let b: f64 = rng.gen_range(0.05..1.0);
        let c: f64 = rng.gen_range(0.05..1.0);
        let s = a + b + c;
        let lambdas = Lambdas::new(a / s, b / s, 1.0 - a / s - b / s).unwrap();
        let model = TrigramModel::train(&TaggedCorpus::new(utts), lambdas).unwrap();
        seen.sort();
        seen.dedup();

        let len = rng.gen_range(1..=6);
        let mut unknown = HashMap::new();
        let tokens = (0..len)
            .map(|i| {
                let known: Vec<&str> = model.lexicon().entries().map(|(w, _)| w).collect();
                if rng.gen_bool(0.2) {
                    let name = format!("unk{i}");
                    let m = rng.gen_range(1..=seen.len());
                    let picked: Vec<Tag> = seen.choose_multiple(rng, m).cloned().collect();
                    let dist: Vec<(Tag, f64)> = picked
                        .into_iter()
                        .map(|t| {
                            let p = rng.gen_range(0.01..1.0);
                            (t, p)
                        })
                        .collect();
                    unknown.insert(name.clone(), dist);
                    name
                } else {
                    known.choose(rng).unwrap().to_string()
                }
            })
            .collect();
        ViterbiInstance {
            model,
            tokens,
            unknown,
        }
    }

    pub fn token_refs(&self) -> Vec<&str> {
        self.tokens.iter().map(String::as_str).collect()
    }

    pub fn proposer(&self) -> impl Fn(&[&str], usize) -> Vec<(Tag, f64)> + '_ {
        move |toks: &[&str], pos: usize| self.unknown.get(toks[pos]).cloned().unwrap_or_default()
    }

    /// Every positive-probability tag sequence, scored left to right in
    /// log space. Among equal scores the sequence that is smallest when
    /// compared from the last position backwards wins.
    pub fn brute_force(&self) -> Vec<Tag> {
        let all: Vec<Tag> = self.model.tags().cloned().collect();
        let lex: Vec<Vec<(Tag, f64)>> = self
            .tokens
            .iter()
            .map(|w| match self.unknown.get(w) {
                Some(d) => {
                    let mut d: Vec<(Tag, f64)> =
                        d.iter().filter(|(_, p)| *p > 0.0).cloned().collect();
                    d.sort_by(|a, b| a.0.cmp(&b.0));
                    d
                }
                None => all
                    .iter()
                    .filter_map(|tag| {
                        let p = self.model.lexicon().prob(w, tag.as_str())?;
                        (p > 0.0).then(|| (tag.clone(), p))
                    })
                    .collect(),
            })
            .collect();
        let n = lex.len();
        let bos = t(BOUNDARY_TAG);
        let mut idx = vec![0usize; n];
        let mut best: Option<(f64, Vec<usize>)> = None;
        loop {
            let mut score = 0.0f64;
            for i in 0..n {
                let p2 = if i >= 2 {
                    &lex[i - 2][idx[i - 2]].0
                } else {
                    &bos
                };
                let p1 = if i >= 1 {
                    &lex[i - 1][idx[i - 1]].0
                } else {
                    &bos
                };
                let (tag, lp) = &lex[i][idx[i]];
                score += self.model.context_prob(p2, p1, tag).ln() + lp.ln();
            }
            let better = match &best {
                None => true,
                Some((s, b)) => score > *s || (score == *s && idx.iter().rev().lt(b.iter().rev())),
            };
            if better {
                best = Some((score, idx.clone()));
            }
            // odometer
            let mut k = 0;
            loop {
                if k == n {
                    let (_, b) = best.unwrap();
                    return b
                        .iter()
                        .enumerate()
                        .map(|(i, &j)| lex[i][j].0.clone())
                        .collect();
                }
                idx[k] += 1;
                if idx[k] < lex[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
}

// ---------------------------------------------------------------- MBL

pub fn entropy_bits(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.ln() / std::f64::consts::LN_2
        })
        .sum()
}

/// Information Gain recomputed with hash maps and natural logs.
pub fn ig_oracle(cases: &[Case]) -> Vec<f64> {
    let mut labels: HashMap<&str, u64> = HashMap::new();
    for c in cases {
        *labels.entry(c.label.as_str()).or_default() += 1;
    }
    let h = entropy_bits(&labels.values().copied().collect::<Vec<_>>());
    let n = cases.len() as f64;
    (0..cases[0].features.len())
        .map(|f| {
            let mut by: HashMap<&str, HashMap<&str, u64>> = HashMap::new();
            for c in cases {
                *by.entry(&c.features[f])
                    .or_default()
                    .entry(c.label.as_str())
                    .or_default() += 1;
            }
            let cond: f64 = by
                .values()
                .map(|m| {
                    let counts: Vec<u64> = m.values().copied().collect();
                    counts.iter().sum::<u64>() as f64 / n * entropy_bits(&counts)
                })
                .sum();
            (h - cond).max(0.0)
        })
        .collect()
}

/// Nearest set by scanning every case: (distance, label counts).
pub fn linear_scan(
    cases: &[Case],
    weights: &[f64],
    instance: &[String],
) -> (f64, BTreeMap<Tag, u64>) {
    let dists: Vec<f64> = cases
        .iter()
        .map(|c| {
            c.features
                .iter()
                .zip(instance)
                .zip(weights)
                .filter(|((a, b), _)| a != b)
                .map(|(_, w)| w)
                .sum()
        })
        .collect();
    let min = dists.iter().copied().fold(f64::INFINITY, f64::min);
    let mut counts = BTreeMap::new();
    for (c, d) in cases.iter().zip(&dists) {
        if *d <= min + 1e-9 {
            *counts.entry(c.label.clone()).or_insert(0u64) += 1;
        }
    }
    (min, counts)
}

/// Modal label; ties to the globally more frequent label, then the
/// smaller name.
pub fn modal_oracle(counts: &BTreeMap<Tag, u64>, cases: &[Case]) -> Tag {
    let global = |l: &Tag| cases.iter().filter(|c| &c.label == l).count() as u64;
    let mut best: Option<(&Tag, u64, u64)> = None;
    for (l, &c) in counts {
        let g = global(l);
        best = match best {
            Some((bl, bc, bg)) if (bc, bg) >= (c, g) => Some((bl, bc, bg)),
            _ => Some((l, c, g)),
        };
    }
    best.unwrap().0.clone()
}

pub fn oracle_weights(base: &CaseBase) -> Vec<f64> {
    match base.metric() {
        Metric::Overlap => vec![1.0; base.arity()],
        Metric::InformationGain => ig_oracle(base.cases()),
    }
}

// ---------------------------------------------------------------- matrices

pub fn matrix(ids: &[&str], rows: &[(&str, &[&str], &str)]) -> TaggerMatrix {
    let utt = rows
        .iter()
        .map(|(tok, s, g)| MatrixRow {
            token: tok.to_string(),
            suggestions: s.iter().map(|x| t(x)).collect(),
            gold: Some(t(g)),
        })
        .collect();
    TaggerMatrix::new(ids.iter().map(|s| s.to_string()).collect(), vec![utt]).unwrap()
}

/// Random matrix over a small tagset; each tagger copies gold with its own
/// probability.
pub fn random_matrix(
    rng: &mut ChaCha8Rng,
    taggers: usize,
    tagset: &[&str],
    rows: usize,
) -> TaggerMatrix {
    let acc: Vec<f64> = (0..taggers).map(|_| rng.gen_range(0.4..0.95)).collect();
    let mut utts = Vec::new();
    let mut cur = Vec::new();
    for r in 0..rows {
        let gold = t(tagset.choose(rng).unwrap());
        let suggestions = acc
            .iter()
            .map(|&a| {
                if rng.gen_bool(a) {
                    gold.clone()
                } else {
                    t(tagset.choose(rng).unwrap())
                }
            })
            .collect();
        cur.push(MatrixRow {
            token: format!("w{}", rng.gen_range(0..12)),
            suggestions,
            gold: Some(gold),
        });
        if rng.gen_bool(0.15) || r + 1 == rows {
            utts.push(std::mem::take(&mut cur));
        }
    }
    let ids = (0..taggers).map(|i| format!("t{i}")).collect();
    TaggerMatrix::new(ids, utts).unwrap()
}

/// TagPair scores recomputed with plain loops over the Tune rows.
pub fn tagpair_oracle(
    tune: &TaggerMatrix,
    suggestions: &[Tag],
    min_pair_count: u64,
) -> BTreeMap<Tag, f64> {
    let rows = tune.rows();
    let dist = |filter: &dyn Fn(&MatrixRow) -> bool| -> Vec<(Tag, f64)> {
        let sel: Vec<&MatrixRow> = rows.iter().filter(|r| filter(r)).collect();
        let mut c: BTreeMap<Tag, f64> = BTreeMap::new();
        for r in &sel {
            *c.entry(r.gold.clone().unwrap()).or_default() += 1.0;
        }
        c.into_iter()
            .map(|(k, v)| (k, v / sel.len() as f64))
            .collect()
    };
    let n = suggestions.len();
    let mut scores: BTreeMap<Tag, f64> = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            if j <= i {
                continue;
            }
            let (si, sj) = (&suggestions[i], &suggestions[j]);
            let seen = rows
                .iter()
                .filter(|r| &r.suggestions[i] == si && &r.suggestions[j] == sj)
                .count() as u64;
            if seen > 0 && seen >= min_pair_count {
                for (tag, p) in dist(&|r| &r.suggestions[i] == si && &r.suggestions[j] == sj) {
                    *scores.entry(tag).or_default() += p;
                }
            } else {
                for (k, s) in [(i, si), (j, sj)] {
                    for (tag, p) in dist(&|r| &r.suggestions[k] == s) {
                        *scores.entry(tag).or_default() += 0.5 * p;
                    }
                }
            }
        }
    }
    scores.retain(|_, v| *v > 0.0);
    scores
}

/// Tune matrix for the DT/CS worked example: two taggers E and T that say
/// DT and CS on 58 rows whose gold tags are CS 19, DT 36, QL 1, WPR 2.
pub fn tagpair_fixture() -> TaggerMatrix {
    let mut rows: Vec<(&str, &[&str], &str)> = Vec::new();
    for (gold, n) in [("CS", 19), ("DT", 36), ("QL", 1), ("WPR", 2)] {
        for _ in 0..n {
            rows.push(("that", &["DT", "CS"], gold));
        }
    }
    matrix(&["E", "T"], &rows)
}

pub fn tagpair_fixture_table() -> PairTable {
    PairTable::train(&tagpair_fixture()).unwrap()
}

// ---------------------------------------------------------------- trees

pub fn case(f: &[&str], l: &str) -> Case {
    Case::new(f, l)
}

/// Two-feature XOR with unequal cell sizes, so the first split already has
/// positive gain.
pub fn xor_cases() -> Vec<Case> {
    let mut v = Vec::new();
    for (a, b, l, n) in [
        ("0", "0", "N", 6),
        ("0", "1", "P", 3),
        ("1", "0", "P", 2),
        ("1", "1", "N", 1),
    ] {
        for _ in 0..n {
            v.push(case(&[a, b], l));
        }
    }
    v
}

/// The XOR cells ×8 with a random third feature and a sprinkling of flipped
/// labels for the unpruned tree to memorize.
pub fn noisy_xor_cases(rng: &mut ChaCha8Rng) -> Vec<Case> {
    let mut v = Vec::new();
    for (a, b, l, n) in [
        ("0", "0", "N", 48),
        ("0", "1", "P", 24),
        ("1", "0", "P", 16),
        ("1", "1", "N", 8),
    ] {
        for _ in 0..n {
            let noise = ["p", "q", "r", "s"].choose(rng).unwrap();
            let flipped = if l == "N" { "P" } else { "N" };
            let label = if rng.gen_bool(0.1) { flipped } else { l };
            v.push(case(&[a, b, noise], label));
        }
    }
    v
}

pub fn training_accuracy(tree: &DecisionTree, cases: &[Case]) -> f64 {
    let ok = cases
        .iter()
        .filter(|c| tree.classify(&c.features).unwrap() == c.label)
        .count();
    ok as f64 / cases.len() as f64
}

/// Random categorical cases over small alphabets.
pub fn random_cases(
    rng: &mut ChaCha8Rng,
    n: usize,
    arity: usize,
    values: usize,
    labels: &[&str],
) -> Vec<Case> {
    (0..n)
        .map(|_| {
            let f: Vec<String> = (0..arity)
                .map(|_| format!("v{}", rng.gen_range(0..values)))
                .collect();
            // Label leans on the first two features.
            let l = if rng.gen_bool(0.7) {
                labels[(f[0].as_bytes()[1] as usize + f[1].as_bytes()[1] as usize) % labels.len()]
            } else {
                labels.choose(rng).unwrap()
            };
            Case::new(&f, l)
        })
        .collect()
}

// ---------------------------------------------------------------- pipeline

/// Generated corpus → split → taggers T and M plus LexProb → matrices →
/// every combiner → machine-readable reports, concatenated.
pub fn pipeline_report(seed: u64, tokens: usize) -> String {
    use tagcombo::combine::{combine, CombineParams, Method};
    use tagcombo::corpus::align_outputs;
    use tagcombo::eval::{baseline_lexprob, EvalReport};
    use tagcombo::mbl::MbTagger;
    use tagcombo::seed::{rng_from_seed, substream};
    use tagcombo::stacker::StackVariant;
    use tagcombo::synth::{CorpusConfig, SyntheticLanguage};
    use tagcombo::trigram::TrigramTagger;
    use tagcombo::voting::VotingRule;

    let lang = SyntheticLanguage::new(
        CorpusConfig::default(),
        &mut rng_from_seed(substream(seed, "language")),
    )
    .unwrap();
    let corpus = lang.generate(tokens, &mut rng_from_seed(substream(seed, "corpus")));
    let (train, tune, test) = corpus.split();
    let tt = TrigramTagger::train(&train, Lambdas::default()).unwrap();
    let mt = MbTagger::train(&train).unwrap();
    let lex = tt.model().lexicon().clone();
    let matrix_for = |part: &TaggedCorpus| {
        let words = part.words();
        let mut cols = vec![Vec::new(), Vec::new(), Vec::new()];
        for u in &words {
            let toks: Vec<&str> = u.iter().map(String::as_str).collect();
            cols[0].push(tt.tag(&toks).unwrap());
            cols[1].push(mt.tag(&toks).unwrap());
            cols[2].push(baseline_lexprob(&lex, &toks));
        }
        align_outputs(part, &cols, &["T".into(), "M".into(), "L".into()]).unwrap()
    };
    let tune_m = matrix_for(&tune);
    let test_m = matrix_for(&test);
    let gold: Vec<Tag> = test_m.golds().unwrap().into_iter().cloned().collect();
    let mut methods: Vec<Method> = VotingRule::ALL.iter().map(|&r| Method::Vote(r)).collect();
    methods.push(Method::TagPair);
    for v in [
        StackVariant::Tags,
        StackVariant::TagsWord,
        StackVariant::TagsContext,
    ] {
        methods.push(Method::StackMbl(v));
    }
    methods.push(Method::StackTree(StackVariant::Tags));
    methods.push(Method::StackTree(StackVariant::TagsContext));
    let params = CombineParams::default();
    let mut out = String::new();
    for m in methods {
        let pred = combine(m, &params, &tune_m, &test_m, seed).unwrap();
        let mut manifest = BTreeMap::new();
        manifest.insert("method".to_string(), m.to_string());
        manifest.insert("seed".to_string(), seed.to_string());
        let r = EvalReport::new(&pred, &gold)
            .unwrap()
            .with_manifest(manifest);
        out.push_str(&r.to_machine());
    }
    out
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}
