//! Accuracy, baselines, agreement analysis, oracle bounds, McNemar's test
//! and the all-subsets sweep.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::combine::{combine, CombineParams, Method};
use crate::corpus::{Lexicon, Tag, TaggerMatrix};
use crate::error::{Error, Result};

/// Unknown tokens in the Random baseline draw from this many top tags.
pub const RANDOM_UNKNOWN_POOL: usize = 20;

/// p-values below this are printed as `< 1e-12`.
pub const P_FLOOR: f64 = 1e-12;

pub fn accuracy<A: AsRef<str>, B: AsRef<str>>(pred: &[A], gold: &[B]) -> Result<f64> {
    if pred.len() != gold.len() {
        return Err(Error::LengthMismatch(pred.len(), gold.len()));
    }
    if pred.is_empty() {
        return Ok(0.0);
    }
    let correct = pred
        .iter()
        .zip(gold)
        .filter(|(p, g)| p.as_ref() == g.as_ref())
        .count();
    Ok(correct as f64 / pred.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TagScore {
    pub tag: Tag,
    pub predicted: u64,
    pub gold: u64,
    pub correct: u64,
}

impl TagScore {
    pub fn precision(&self) -> Option<f64> {
        (self.predicted > 0).then(|| self.correct as f64 / self.predicted as f64)
    }

    pub fn recall(&self) -> Option<f64> {
        (self.gold > 0).then(|| self.correct as f64 / self.gold as f64)
    }
}

/// Per-tag counts for precision and recall, sorted by tag.
pub fn per_tag_scores(pred: &[Tag], gold: &[Tag]) -> Result<Vec<TagScore>> {
    if pred.len() != gold.len() {
        return Err(Error::LengthMismatch(pred.len(), gold.len()));
    }
    let mut m: BTreeMap<&Tag, (u64, u64, u64)> = BTreeMap::new();
    for (p, g) in pred.iter().zip(gold) {
        m.entry(p).or_default().0 += 1;
        let e = m.entry(g).or_default();
        e.1 += 1;
        if p == g {
            e.2 += 1;
        }
    }
    Ok(m.into_iter()
        .map(|(t, (predicted, gold, correct))| TagScore {
            tag: t.clone(),
            predicted,
            gold,
            correct,
        })
        .collect())
}

/// Uniform choice among the token's Train tags; unknown tokens draw from
/// the most frequent Train tags.
pub fn baseline_random<R: Rng + ?Sized>(
    lexicon: &Lexicon,
    tokens: &[&str],
    rng: &mut R,
) -> Vec<Tag> {
    let pool = lexicon.most_frequent_tags(RANDOM_UNKNOWN_POOL);
    tokens
        .iter()
        .map(|tok| match lexicon.tags(tok) {
            Some(tags) => {
                let tags: Vec<&Tag> = tags.keys().collect();
                (*tags.choose(rng).expect("known token has tags")).clone()
            }
            None => pool.choose(rng).expect("non-empty lexicon").clone(),
        })
        .collect()
}

/// The token's most frequent Train tag; the overall most frequent tag for
/// unknown tokens.
pub fn baseline_lexprob(lexicon: &Lexicon, tokens: &[&str]) -> Vec<Tag> {
    let fallback = lexicon.most_frequent_tag().expect("non-empty lexicon");
    tokens
        .iter()
        .map(|tok| {
            lexicon
                .modal_tag(tok)
                .cloned()
                .unwrap_or_else(|| fallback.clone())
        })
        .collect()
}

/// Agreement pattern of one row, by the size of the bloc holding the
/// correct tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Agreement {
    AllCorrect,
    /// Correct bloc strictly largest (3-1, 2-1-1 for four taggers).
    MajorityCorrect,
    /// Correct bloc tied for largest (2-2, 1-1-1-1).
    CorrectPresentNoMajority,
    /// Correct bloc smaller than another (1-3, 1-2-1).
    MinorityCorrect,
    AllWrong,
}

pub fn classify_agreement(suggestions: &[Tag], gold: &Tag) -> Agreement {
    let mut blocs: BTreeMap<&Tag, usize> = BTreeMap::new();
    for s in suggestions {
        *blocs.entry(s).or_insert(0) += 1;
    }
    let correct = blocs.get(gold).copied().unwrap_or(0);
    if correct == 0 {
        return Agreement::AllWrong;
    }
    if correct == suggestions.len() {
        return Agreement::AllCorrect;
    }
    let largest_other = blocs
        .iter()
        .filter(|(t, _)| **t != gold)
        .map(|(_, &c)| c)
        .max()
        .unwrap_or(0);
    if correct > largest_other {
        Agreement::MajorityCorrect
    } else if correct == largest_other {
        Agreement::CorrectPresentNoMajority
    } else {
        Agreement::MinorityCorrect
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AgreementBreakdown {
    pub all_correct: f64,
    pub majority_correct: f64,
    pub correct_present_no_majority: f64,
    pub minority_correct: f64,
    pub all_wrong: f64,
}

impl AgreementBreakdown {
    pub fn from_matrix(matrix: &TaggerMatrix) -> Result<AgreementBreakdown> {
        let golds = matrix.golds()?;
        let mut counts: BTreeMap<Agreement, usize> = BTreeMap::new();
        for (row, gold) in matrix.rows().iter().zip(golds) {
            *counts
                .entry(classify_agreement(&row.suggestions, gold))
                .or_insert(0) += 1;
        }
        let n = matrix.len().max(1) as f64;
        let f = |a| counts.get(&a).copied().unwrap_or(0) as f64 / n;
        Ok(AgreementBreakdown {
            all_correct: f(Agreement::AllCorrect),
            majority_correct: f(Agreement::MajorityCorrect),
            correct_present_no_majority: f(Agreement::CorrectPresentNoMajority),
            minority_correct: f(Agreement::MinorityCorrect),
            all_wrong: f(Agreement::AllWrong),
        })
    }

    pub fn sum(&self) -> f64 {
        self.all_correct
            + self.majority_correct
            + self.correct_present_no_majority
            + self.minority_correct
            + self.all_wrong
    }

    /// (some tagger correct, correct tag not outvoted).
    pub fn oracle_bounds(&self) -> OracleBounds {
        OracleBounds {
            any_correct: 1.0 - self.all_wrong,
            not_outvoted: self.all_correct
                + self.majority_correct
                + self.correct_present_no_majority,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleBounds {
    pub any_correct: f64,
    pub not_outvoted: f64,
}

pub fn oracle_bounds(matrix: &TaggerMatrix) -> Result<OracleBounds> {
    Ok(AgreementBreakdown::from_matrix(matrix)?.oracle_bounds())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McNemar {
    /// A right, B wrong.
    pub b: u64,
    /// A wrong, B right.
    pub c: u64,
    pub chi_square: f64,
    pub p_value: f64,
    pub continuity: bool,
}

impl McNemar {
    pub fn from_counts(b: u64, c: u64, continuity: bool) -> McNemar {
        if b + c == 0 {
            return McNemar {
                b,
                c,
                chi_square: 0.0,
                p_value: 1.0,
                continuity,
            };
        }
        let diff = (b as f64 - c as f64).abs();
        let num = if continuity {
            (diff - 1.0).max(0.0)
        } else {
            diff
        };
        let chi_square = num * num / (b + c) as f64;
        let p_value = ChiSquared::new(1.0).expect("1 df").sf(chi_square);
        McNemar {
            b,
            c,
            chi_square,
            p_value,
            continuity,
        }
    }
}

pub fn mcnemar(pred_a: &[Tag], pred_b: &[Tag], gold: &[Tag], continuity: bool) -> Result<McNemar> {
    if pred_a.len() != gold.len() {
        return Err(Error::LengthMismatch(pred_a.len(), gold.len()));
    }
    if pred_b.len() != gold.len() {
        return Err(Error::LengthMismatch(pred_b.len(), gold.len()));
    }
    let (mut b, mut c) = (0, 0);
    for ((a, bb), g) in pred_a.iter().zip(pred_b).zip(gold) {
        match (a == g, bb == g) {
            (true, false) => b += 1,
            (false, true) => c += 1,
            _ => {}
        }
    }
    Ok(McNemar::from_counts(b, c, continuity))
}

/// Four significant digits; values below [`P_FLOOR`] print as `< 1e-12`.
pub fn format_p(p: f64) -> String {
    if p < P_FLOOR {
        "< 1e-12".to_owned()
    } else if p >= 1e-3 {
        let digits = (3 - p.log10().floor() as i32).max(0) as usize;
        format!("{:.*}", digits, p)
    } else {
        format!("{:.3e}", p)
    }
}

/// One line of the all-subsets table.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub taggers: Vec<String>,
    pub label: String,
    pub accuracy: f64,
    /// Mean accuracy of the subset's members (combinations only).
    pub component_average: Option<f64>,
    /// Most accurate member and its accuracy (combinations only).
    pub best_component: Option<(String, f64)>,
    /// `(err_best − err_combo) / err_best` (combinations only).
    pub error_reduction: Option<f64>,
}

impl SweepRow {
    pub fn increase(&self) -> Option<f64> {
        self.component_average.map(|a| self.accuracy - a)
    }
}

fn subset_label(ids: &[String]) -> String {
    if ids.iter().all(|i| i.chars().count() == 1) {
        ids.concat()
    } else {
        ids.join("+")
    }
}

/// Accuracy on `test` of every single tagger and of `method` trained on
/// `tune` for every subset of two or more taggers, sorted by accuracy.
pub fn sweep_subsets(
    tune: &TaggerMatrix,
    test: &TaggerMatrix,
    method: Method,
    params: &CombineParams,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let n = test.num_taggers();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "sweep needs at least two taggers".into(),
        ));
    }
    if tune.tagger_ids() != test.tagger_ids() {
        return Err(Error::InvalidParameter(
            "Tune and Test matrices name different taggers".into(),
        ));
    }
    if n > 16 {
        return Err(Error::InvalidParameter(
            "too many taggers for a full sweep".into(),
        ));
    }
    let gold: Vec<Tag> = test.golds()?.into_iter().cloned().collect();
    let singles: Vec<f64> = (0..n)
        .map(|i| accuracy(&test.column(i), &gold))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for mask in 1u32..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let ids: Vec<String> = members
            .iter()
            .map(|&i| test.tagger_ids()[i].clone())
            .collect();
        let label = subset_label(&ids);
        if members.len() == 1 {
            rows.push(SweepRow {
                taggers: ids,
                label,
                accuracy: singles[members[0]],
                component_average: None,
                best_component: None,
                error_reduction: None,
            });
            continue;
        }
        let pred = combine(
            method,
            params,
            &tune.select_taggers(&members),
            &test.select_taggers(&members),
            seed,
        )?;
        let acc = accuracy(&pred, &gold)?;
        let avg = members.iter().map(|&i| singles[i]).sum::<f64>() / members.len() as f64;
        let best =
            members.iter().copied().fold(
                members[0],
                |b, i| if singles[i] > singles[b] { i } else { b },
            );
        let err_best = 1.0 - singles[best];
        let reduction = if err_best > 0.0 {
            (err_best - (1.0 - acc)) / err_best
        } else {
            0.0
        };
        rows.push(SweepRow {
            taggers: ids,
            label,
            accuracy: acc,
            component_average: Some(avg),
            best_component: Some((test.tagger_ids()[best].clone(), singles[best])),
            error_reduction: Some(reduction),
        });
    }
    rows.sort_by(|a, b| {
        a.accuracy
            .total_cmp(&b.accuracy)
            .then_with(|| a.label.cmp(&b.label))
    });
    Ok(rows)
}

pub fn sweep_to_text(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:>8} {:>18} {:>16}",
        "subset", "accuracy", "increase vs avg", "err. reduction"
    );
    for r in rows {
        let inc = match r.component_average {
            Some(a) => format!("{:.2}{:+.2}", 100.0 * a, 100.0 * (r.accuracy - a)),
            None => "-".into(),
        };
        let red = match (&r.error_reduction, &r.best_component) {
            (Some(x), Some((id, _))) => format!("{:.1} ({})", 100.0 * x, id),
            _ => "-".into(),
        };
        let _ = writeln!(
            out,
            "{:<12} {:>8.2} {:>18} {:>16}",
            r.label,
            100.0 * r.accuracy,
            inc,
            red
        );
    }
    out
}

pub fn sweep_to_machine(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    for r in rows {
        let _ = writeln!(out, "subset.{}.accuracy: {:.6}", r.label, r.accuracy);
        if let (Some(avg), Some((id, acc)), Some(red)) =
            (r.component_average, &r.best_component, r.error_reduction)
        {
            let _ = writeln!(out, "subset.{}.component_average: {:.6}", r.label, avg);
            let _ = writeln!(out, "subset.{}.increase: {:.6}", r.label, r.accuracy - avg);
            let _ = writeln!(out, "subset.{}.best_component: {}", r.label, id);
            let _ = writeln!(
                out,
                "subset.{}.best_component_accuracy: {:.6}",
                r.label, acc
            );
            let _ = writeln!(out, "subset.{}.error_reduction: {:.6}", r.label, red);
        }
    }
    out
}

/// Accuracy report for one prediction column.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    /// Run parameters echoed into the report.
    pub manifest: BTreeMap<String, String>,
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub per_tag: Vec<TagScore>,
    pub mcnemar: Option<McNemar>,
}

impl EvalReport {
    pub fn new(pred: &[Tag], gold: &[Tag]) -> Result<EvalReport> {
        let per_tag = per_tag_scores(pred, gold)?;
        let correct = per_tag.iter().map(|t| t.correct as usize).sum();
        Ok(EvalReport {
            manifest: BTreeMap::new(),
            total: gold.len(),
            correct,
            accuracy: if gold.is_empty() {
                0.0
            } else {
                correct as f64 / gold.len() as f64
            },
            per_tag,
            mcnemar: None,
        })
    }

    pub fn with_manifest(mut self, manifest: BTreeMap<String, String>) -> EvalReport {
        self.manifest = manifest;
        self
    }

    pub fn with_mcnemar(mut self, m: McNemar) -> EvalReport {
        self.mcnemar = Some(m);
        self
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.manifest {
            let _ = writeln!(out, "# {k}: {v}");
        }
        let _ = writeln!(
            out,
            "accuracy {:.2}% ({} / {})",
            100.0 * self.accuracy,
            self.correct,
            self.total
        );
        if let Some(m) = &self.mcnemar {
            let _ = writeln!(
                out,
                "McNemar: b = {}, c = {}, chi2 = {:.4}, p = {}",
                m.b,
                m.c,
                m.chi_square,
                format_p(m.p_value)
            );
        }
        let _ = writeln!(
            out,
            "{:<10} {:>9} {:>9} {:>8}",
            "tag", "precision", "recall", "gold"
        );
        let pct = |x: Option<f64>| x.map_or("-".to_owned(), |v| format!("{:.2}", 100.0 * v));
        for t in &self.per_tag {
            let _ = writeln!(
                out,
                "{:<10} {:>9} {:>9} {:>8}",
                t.tag.as_str(),
                pct(t.precision()),
                pct(t.recall()),
                t.gold
            );
        }
        out
    }

    /// `key: value` lines.
    pub fn to_machine(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.manifest {
            let _ = writeln!(out, "manifest.{k}: {v}");
        }
        let _ = writeln!(out, "accuracy: {:.6}", self.accuracy);
        let _ = writeln!(out, "correct: {}", self.correct);
        let _ = writeln!(out, "total: {}", self.total);
        if let Some(m) = &self.mcnemar {
            let _ = writeln!(out, "mcnemar.b: {}", m.b);
            let _ = writeln!(out, "mcnemar.c: {}", m.c);
            let _ = writeln!(out, "mcnemar.chi_square: {:.6}", m.chi_square);
            let _ = writeln!(out, "mcnemar.p: {}", format_p(m.p_value));
            let _ = writeln!(out, "mcnemar.continuity: {}", m.continuity);
        }
        for t in &self.per_tag {
            let opt = |x: Option<f64>| x.map_or("-".to_owned(), |v| format!("{v:.6}"));
            let _ = writeln!(out, "tag.{}.precision: {}", t.tag, opt(t.precision()));
            let _ = writeln!(out, "tag.{}.recall: {}", t.tag, opt(t.recall()));
            let _ = writeln!(out, "tag.{}.gold: {}", t.tag, t.gold);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tags(s: &str) -> Vec<Tag> {
        s.split(',').map(Tag::new).collect()
    }

    #[test]
    fn accuracy_basics() {
        assert_eq!(accuracy(&tags("A,B"), &tags("A,B")).unwrap(), 1.0);
        let gold: Vec<Tag> = (0..100).map(|_| Tag::new("X")).collect();
        let mut pred = gold.clone();
        for p in pred.iter_mut().take(3) {
            *p = Tag::new("Y");
        }
        assert!((accuracy(&pred, &gold).unwrap() - 0.97).abs() < 1e-12);
        assert!(matches!(
            accuracy(&tags("A"), &tags("A,B")),
            Err(Error::LengthMismatch(1, 2))
        ));
    }

    #[test]
    fn agreement_patterns() {
        let x = Tag::new("X");
        let y = Tag::new("Y");
        assert_eq!(
            classify_agreement(&tags("X,X,X,X"), &x),
            Agreement::AllCorrect
        );
        assert_eq!(
            classify_agreement(&tags("X,X,Y,Z"), &y),
            Agreement::MinorityCorrect
        );
        assert_eq!(
            classify_agreement(&tags("X,X,Y,Y"), &x),
            Agreement::CorrectPresentNoMajority
        );
        assert_eq!(
            classify_agreement(&tags("A,B,C,X"), &x),
            Agreement::CorrectPresentNoMajority
        );
        assert_eq!(
            classify_agreement(&tags("X,X,X,Y"), &x),
            Agreement::MajorityCorrect
        );
        assert_eq!(
            classify_agreement(&tags("X,X,Y,Z"), &x),
            Agreement::MajorityCorrect
        );
        assert_eq!(
            classify_agreement(&tags("X,Y,Y,Y"), &x),
            Agreement::MinorityCorrect
        );
        assert_eq!(
            classify_agreement(&tags("A,B,C,D"), &x),
            Agreement::AllWrong
        );
    }

    #[test]
    fn table_fractions_give_oracle_bounds() {
        let b = AgreementBreakdown {
            all_correct: 0.9249,
            majority_correct: 0.0434,
            correct_present_no_majority: 0.0137,
            minority_correct: 0.0101,
            all_wrong: 0.0078,
        };
        let o = b.oracle_bounds();
        assert!((o.any_correct - 0.9922).abs() < 1e-9);
        assert!((o.not_outvoted - 0.9820).abs() < 1e-9);
        assert!(o.not_outvoted <= o.any_correct);
    }

    #[test]
    fn mcnemar_fixture() {
        let m = McNemar::from_counts(40, 10, true);
        assert!((m.chi_square - 16.82).abs() < 1e-9);
        // scipy.stats.chi2.sf(16.82, 1)
        assert!((m.p_value - 4.109788e-5).abs() < 1e-10);
        let swapped = McNemar::from_counts(10, 40, true);
        assert_eq!(swapped.chi_square, m.chi_square);
        let none = McNemar::from_counts(0, 0, true);
        assert_eq!((none.chi_square, none.p_value), (0.0, 1.0));
        let raw = McNemar::from_counts(40, 10, false);
        assert!((raw.chi_square - 18.0).abs() < 1e-12);
    }

    #[test]
    fn mcnemar_identical_predictions() {
        let g = tags("A,B,C");
        let m = mcnemar(&tags("A,X,C"), &tags("A,X,C"), &g, true).unwrap();
        assert_eq!((m.b, m.c, m.chi_square, m.p_value), (0, 0, 0.0, 1.0));
    }

    #[test]
    fn p_formatting() {
        assert_eq!(format_p(0.0), "< 1e-12");
        assert_eq!(format_p(0.02741), "0.02741");
        assert_eq!(format_p(0.2766), "0.2766");
        assert_eq!(format_p(4.109788e-5), "4.110e-5");
        assert_eq!(format_p(1.0), "1.000");
    }

    #[test]
    fn lexprob_and_random() {
        let mut lex = Lexicon::default();
        for _ in 0..9 {
            lex.add("w", &Tag::new("X"));
        }
        lex.add("w", &Tag::new("Y"));
        lex.add("u", &Tag::new("Z"));
        assert_eq!(baseline_lexprob(&lex, &["w", "u", "new"]), tags("X,Z,X"));
        let mut rng = crate::seed::rng_from_seed(1);
        let r = baseline_random(&lex, &["u"; 20], &mut rng);
        assert!(r.iter().all(|t| t.as_str() == "Z"));
    }
}
