//! `tagcombo`: split corpora, train and apply the component taggers, build
//! tagger matrices, combine them and evaluate the result.

#[macro_use]
mod output;
mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use tagcombo::combine::{CombineParams, Combiner, Method};
use tagcombo::corpus::{align_outputs, parse_column, serialize_column, Lexicon, TagColumn};
use tagcombo::eval::{
    baseline_lexprob, baseline_random, mcnemar, sweep_subsets, sweep_to_machine, sweep_to_text,
    AgreementBreakdown, EvalReport,
};
use tagcombo::mbl::MbTagger;
use tagcombo::pairwise::PairTable;
use tagcombo::seed::row_rng;
use tagcombo::stacker::{disagreement_rate, StackVariant, DEFAULT_CONFIDENCE};
use tagcombo::synth::{CorpusConfig, Simulation, DEFAULT_CONFUSION_BIAS};
use tagcombo::trigram::{Lambdas, TrigramTagger};
use tagcombo::{Tag, TaggedCorpus, TaggerMatrix};

use manifest::{write_output, RunManifest};

#[derive(Parser)]
#[command(
    name = "tagcombo",
    version,
    about = "Combine the outputs of several wordclass taggers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodName {
    Majority,
    Totprec,
    Tagprec,
    Precrec,
    Tagpair,
    StackMbl,
    StackTree,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantName {
    Tags,
    TagsWord,
    TagsContext,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Baseline {
    Random,
    Lexprob,
}

#[derive(Subcommand)]
enum Command {
    /// Split a corpus or matrix 8/1/1 into Train, Tune and Test by utterance.
    Split {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out_prefix: String,
    },
    /// Train the trigram tagger.
    TrainT {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Interpolation weights λ3,λ2,λ1.
        #[arg(long, default_value = "0.7,0.2,0.1")]
        lambdas: String,
    },
    /// Tag with the trigram tagger.
    TagT {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the memory-based tagger.
    TrainM {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Tag with the memory-based tagger.
    TagM {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tag with the Random or LexProb baseline.
    Baseline {
        #[arg(long, value_enum)]
        method: Baseline,
        /// Corpus the lexicon is read from.
        #[arg(long)]
        train: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Align tagger output columns with a benchmark into a matrix.
    Align {
        #[arg(long)]
        gold: PathBuf,
        /// ID=FILE, once per tagger.
        #[arg(long = "column", required = true)]
        columns: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a combiner on Tune and apply it to Test.
    Combine {
        #[arg(long, value_enum)]
        method: MethodName,
        #[arg(long, value_enum)]
        variant: Option<VariantName>,
        #[arg(long)]
        tune: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        min_pair_count: u64,
        #[arg(long, default_value_t = DEFAULT_CONFIDENCE)]
        prune_cf: f64,
        #[arg(long)]
        no_prune: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Accuracy, per-tag scores and optionally McNemar against another column.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        /// Benchmark corpus, or a matrix with gold tags.
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        against: Option<PathBuf>,
        #[arg(long)]
        no_continuity: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Agreement patterns and oracle bounds of a matrix.
    Agreement {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Combine every subset of taggers.
    Sweep {
        #[arg(long, value_enum, default_value = "tagpair")]
        method: MethodName,
        #[arg(long, value_enum)]
        variant: Option<VariantName>,
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        tune: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        min_pair_count: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Generate a benchmark and simulated tagger outputs.
    Synth {
        #[arg(long)]
        tokens: usize,
        #[arg(long, default_value_t = 4)]
        taggers: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        acc: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "synth")]
        out_prefix: String,
        #[arg(long, default_value_t = 20)]
        tags: usize,
        #[arg(long, default_value_t = 3000)]
        vocab: usize,
        #[arg(long, default_value_t = DEFAULT_CONFUSION_BIAS)]
        confusion_bias: f64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Print the TagPair distributions learned from a Tune matrix.
    InspectPairs {
        #[arg(long)]
        tune: PathBuf,
        /// Only pairs where the first tagger said this tag.
        #[arg(long)]
        first: Option<String>,
        /// Only pairs where the second tagger said this tag.
        #[arg(long)]
        second: Option<String>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn is_matrix(text: &str) -> bool {
    text.trim_start().starts_with("#matrix")
}

/// Utterances of a vertical file; a tag column, if present, is ignored.
fn read_tokens(text: &str) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for line in text.lines() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        } else {
            cur.push(line.split('\t').next().unwrap_or("").to_owned());
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn tag_all<F>(utts: &[Vec<String>], f: F) -> Result<TagColumn>
where
    F: Fn(&[&str]) -> tagcombo::Result<Vec<Tag>> + Sync,
{
    utts.par_iter()
        .map(|u| {
            let toks: Vec<&str> = u.iter().map(String::as_str).collect();
            f(&toks).map_err(anyhow::Error::from)
        })
        .collect()
}

fn parse_method(method: MethodName, variant: Option<VariantName>) -> Result<Method> {
    let name = method.to_possible_value().expect("no skipped variants");
    let v = match variant {
        None | Some(VariantName::Tags) => StackVariant::Tags,
        Some(VariantName::TagsWord) => StackVariant::TagsWord,
        Some(VariantName::TagsContext) => StackVariant::TagsContext,
    };
    Ok(Method::parse(name.get_name(), v)?)
}

fn gold_tags(text: &str) -> Result<Vec<Tag>> {
    if is_matrix(text) {
        let m = TaggerMatrix::parse(text)?;
        Ok(m.golds()?.into_iter().cloned().collect())
    } else {
        Ok(TaggedCorpus::parse(text)?.gold_tags())
    }
}

fn emit(report: String, path: Option<&Path>, manifest: &RunManifest) -> Result<()> {
    out!("{report}");
    if let Some(p) = path {
        write_output(p, &report, manifest)?;
    }
    Ok(())
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Split { input, out_prefix } => {
            let text = read(&input)?;
            let mut m = RunManifest::new("split", None);
            m.input("in", &text);
            let parts = ["train", "tune", "test"];
            if is_matrix(&text) {
                let (a, b, c) = TaggerMatrix::parse(&text)?.split();
                for (name, part) in parts.iter().zip([a, b, c]) {
                    let mut pm = m.clone();
                    pm.param("part", name);
                    let path = PathBuf::from(format!("{out_prefix}.{name}.matrix"));
                    write_output(&path, &part.to_text(), &pm)?;
                    eprintln!("{}: {} rows", path.display(), part.len());
                }
            } else {
                let (a, b, c) = TaggedCorpus::parse(&text)?.split();
                for (name, part) in parts.iter().zip([a, b, c]) {
                    let mut pm = m.clone();
                    pm.param("part", name);
                    let path = PathBuf::from(format!("{out_prefix}.{name}.vert"));
                    write_output(&path, &part.to_vertical(), &pm)?;
                    eprintln!(
                        "{}: {} utterances, {} tokens",
                        path.display(),
                        part.utterances().len(),
                        part.num_tokens()
                    );
                }
            }
        }
        Command::TrainT {
            train,
            model,
            lambdas,
        } => {
            let text = read(&train)?;
            let l = Lambdas::parse(&lambdas)?;
            let tagger = TrigramTagger::train(&TaggedCorpus::parse(&text)?, l)?;
            let mut m = RunManifest::new("train-t", None);
            m.param("lambdas", &lambdas).input("train", &text);
            write_output(&model, &tagger.to_json()?, &m)?;
        }
        Command::TagT { model, input, out } => {
            let mtext = read(&model)?;
            let itext = read(&input)?;
            let tagger = TrigramTagger::from_json(&mtext)?;
            let col = tag_all(&read_tokens(&itext), |t| tagger.tag(t))?;
            let mut m = RunManifest::new("tag-t", None);
            m.input("model", &mtext).input("in", &itext);
            write_output(&out, &serialize_column(&col), &m)?;
        }
        Command::TrainM { train, model } => {
            let text = read(&train)?;
            let tagger = MbTagger::train(&TaggedCorpus::parse(&text)?)?;
            let mut m = RunManifest::new("train-m", None);
            m.input("train", &text);
            write_output(&model, &tagger.to_json()?, &m)?;
        }
        Command::TagM { model, input, out } => {
            let mtext = read(&model)?;
            let itext = read(&input)?;
            let tagger = MbTagger::from_json(&mtext)?;
            let col = tag_all(&read_tokens(&itext), |t| tagger.tag(t))?;
            let mut m = RunManifest::new("tag-m", None);
            m.input("model", &mtext).input("in", &itext);
            write_output(&out, &serialize_column(&col), &m)?;
        }
        Command::Baseline {
            method,
            train,
            input,
            out,
            seed,
        } => {
            let ttext = read(&train)?;
            let itext = read(&input)?;
            let lex = Lexicon::from_corpus(&TaggedCorpus::parse(&ttext)?);
            if lex.total_tokens() == 0 {
                bail!("{} has no tokens", train.display());
            }
            let utts = read_tokens(&itext);
            let col: TagColumn = utts
                .par_iter()
                .enumerate()
                .map(|(i, u)| {
                    let toks: Vec<&str> = u.iter().map(String::as_str).collect();
                    match method {
                        Baseline::Lexprob => baseline_lexprob(&lex, &toks),
                        Baseline::Random => baseline_random(&lex, &toks, &mut row_rng(seed, i)),
                    }
                })
                .collect();
            let mut m = RunManifest::new("baseline", Some(seed));
            m.param("method", format!("{method:?}").to_lowercase())
                .param("unknown_random_pool", tagcombo::eval::RANDOM_UNKNOWN_POOL)
                .param("unknown_lexprob", "most frequent Train tag")
                .input("train", &ttext)
                .input("in", &itext);
            write_output(&out, &serialize_column(&col), &m)?;
        }
        Command::Align { gold, columns, out } => {
            let gtext = read(&gold)?;
            let corpus = TaggedCorpus::parse(&gtext)?;
            let mut m = RunManifest::new("align", None);
            m.input("gold", &gtext);
            let mut ids = Vec::new();
            let mut cols = Vec::new();
            for arg in &columns {
                let Some((id, path)) = arg.split_once('=') else {
                    bail!("--column expects ID=FILE, got {arg}");
                };
                let text = read(Path::new(path))?;
                cols.push(parse_column(&text).with_context(|| format!("in {path}"))?);
                m.input(&format!("column.{id}"), &text);
                ids.push(id.to_owned());
            }
            let matrix = align_outputs(&corpus, &cols, &ids)?;
            m.param("taggers", ids.join(","));
            write_output(&out, &matrix.to_text(), &m)?;
        }
        Command::Combine {
            method,
            variant,
            tune,
            test,
            out,
            seed,
            min_pair_count,
            prune_cf,
            no_prune,
            format,
        } => {
            let method = parse_method(method, variant)?;
            let tune_text = read(&tune)?;
            let test_text = read(&test)?;
            let tune_m = TaggerMatrix::parse(&tune_text)?;
            let test_m = TaggerMatrix::parse(&test_text)?;
            if tune_m.tagger_ids() != test_m.tagger_ids() {
                bail!("Tune and Test matrices name different taggers");
            }
            let params = CombineParams {
                min_pair_count,
                prune_cf: (!no_prune).then_some(prune_cf),
            };
            let pred = Combiner::train(method, &params, &tune_m)?.apply(&test_m, seed)?;
            let mut m = RunManifest::new("combine", Some(seed));
            m.param("method", method)
                .param("min_pair_count", min_pair_count)
                .param(
                    "prune_cf",
                    params.prune_cf.map_or("none".to_owned(), |c| c.to_string()),
                )
                .param("taggers", tune_m.tagger_ids().join(","))
                .input("tune", &tune_text)
                .input("test", &test_text);
            // Column layout follows the Test utterances.
            let mut col: TagColumn = Vec::new();
            for r in test_m.utterance_ranges() {
                col.push(pred[r].to_vec());
            }
            write_output(&out, &serialize_column(&col), &m)?;
            if test_m.has_gold() {
                let gold: Vec<Tag> = test_m.golds()?.into_iter().cloned().collect();
                let report = EvalReport::new(&pred, &gold)?.with_manifest(m.flatten());
                out!(
                    "{}",
                    match format {
                        Format::Text => report.to_text(),
                        Format::Machine => report.to_machine(),
                    }
                );
            }
        }
        Command::Eval {
            pred,
            gold,
            against,
            no_continuity,
            format,
            report,
        } => {
            let ptext = read(&pred)?;
            let gtext = read(&gold)?;
            let p: Vec<Tag> = parse_column(&ptext)?.into_iter().flatten().collect();
            let g = gold_tags(&gtext)?;
            let mut m = RunManifest::new("eval", None);
            m.param("continuity", !no_continuity)
                .input("pred", &ptext)
                .input("gold", &gtext);
            let mut r = EvalReport::new(&p, &g)?;
            if let Some(a) = against {
                let atext = read(&a)?;
                let b: Vec<Tag> = parse_column(&atext)?.into_iter().flatten().collect();
                m.input("against", &atext);
                r = r.with_mcnemar(mcnemar(&p, &b, &g, !no_continuity)?);
            }
            let r = r.with_manifest(m.flatten());
            let text = match format {
                Format::Text => r.to_text(),
                Format::Machine => r.to_machine(),
            };
            emit(text, report.as_deref(), &m)?;
        }
        Command::Agreement { matrix, format } => {
            let text = read(&matrix)?;
            let mx = TaggerMatrix::parse(&text)?;
            let b = AgreementBreakdown::from_matrix(&mx)?;
            let o = b.oracle_bounds();
            let rows = [
                ("all_correct", b.all_correct),
                ("majority_correct", b.majority_correct),
                ("correct_present_no_majority", b.correct_present_no_majority),
                ("minority_correct", b.minority_correct),
                ("all_wrong", b.all_wrong),
                ("oracle.any_correct", o.any_correct),
                ("oracle.not_outvoted", o.not_outvoted),
                ("disagreement_rate", disagreement_rate(&mx)),
            ];
            for (k, v) in rows {
                match format {
                    Format::Text => outln!("{:<30} {:>7.2}%", k, 100.0 * v),
                    Format::Machine => outln!("{k}: {v:.6}"),
                }
            }
        }
        Command::Sweep {
            method,
            variant,
            matrix,
            tune,
            seed,
            min_pair_count,
            format,
            report,
        } => {
            let method = parse_method(method, variant)?;
            let ttext = read(&tune)?;
            let mtext = read(&matrix)?;
            let params = CombineParams {
                min_pair_count,
                ..CombineParams::default()
            };
            let rows = sweep_subsets(
                &TaggerMatrix::parse(&ttext)?,
                &TaggerMatrix::parse(&mtext)?,
                method,
                &params,
                seed,
            )?;
            let mut m = RunManifest::new("sweep", Some(seed));
            m.param("method", method)
                .param("min_pair_count", min_pair_count)
                .input("tune", &ttext)
                .input("matrix", &mtext);
            let text = match format {
                Format::Text => sweep_to_text(&rows),
                Format::Machine => sweep_to_machine(&rows),
            };
            emit(text, report.as_deref(), &m)?;
        }
        Command::Synth {
            tokens,
            taggers,
            acc,
            seed,
            out_prefix,
            tags,
            vocab,
            confusion_bias,
            format,
        } => {
            if acc.len() != taggers {
                bail!(
                    "--acc lists {} accuracies for {} taggers",
                    acc.len(),
                    taggers
                );
            }
            if !(0.0..=1.0).contains(&confusion_bias) {
                bail!("--confusion-bias must lie in [0,1]");
            }
            let mut sim = Simulation::new(acc.clone(), seed);
            sim.corpus = CorpusConfig {
                num_tags: tags,
                vocab_size: vocab,
                ..CorpusConfig::default()
            };
            sim.confusion_bias = confusion_bias;
            let (corpus, matrix) = sim.benchmark(tokens)?;
            let mut m = RunManifest::new("synth", Some(seed));
            m.param("tokens", tokens)
                .param("taggers", taggers)
                .param(
                    "acc",
                    acc.iter()
                        .map(|a| a.to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                )
                .param("tags", tags)
                .param("vocab", vocab)
                .param("confusion_bias", confusion_bias);
            write_output(
                Path::new(&format!("{out_prefix}.gold.vert")),
                &corpus.to_vertical(),
                &m,
            )?;
            write_output(
                Path::new(&format!("{out_prefix}.matrix")),
                &matrix.to_text(),
                &m,
            )?;
            let gold = matrix.golds()?;
            for (i, id) in matrix.tagger_ids().iter().enumerate() {
                let mut col: TagColumn = Vec::new();
                for r in matrix.utterance_ranges() {
                    col.push(
                        matrix.rows()[r]
                            .iter()
                            .map(|row| row.suggestions[i].clone())
                            .collect(),
                    );
                }
                let mut cm = m.clone();
                cm.param("tagger", id);
                write_output(
                    Path::new(&format!("{out_prefix}.{id}.col")),
                    &serialize_column(&col),
                    &cm,
                )?;
                let right = matrix
                    .rows()
                    .iter()
                    .zip(&gold)
                    .filter(|(r, g)| &&r.suggestions[i] == *g)
                    .count();
                let a = right as f64 / matrix.len() as f64;
                match format {
                    Format::Text => outln!("{id}: target {:.4}, measured {:.4}", acc[i], a),
                    Format::Machine => outln!("tagger.{id}.accuracy: {a:.6}"),
                }
            }
        }
        Command::InspectPairs {
            tune,
            first,
            second,
        } => {
            let mx = TaggerMatrix::parse(&read(&tune)?)?;
            let table = PairTable::train(&mx)?;
            let ids = mx.tagger_ids();
            let mut seen = std::collections::BTreeSet::new();
            for r in mx.rows() {
                for i in 0..ids.len() {
                    for j in i + 1..ids.len() {
                        let (a, b) = (&r.suggestions[i], &r.suggestions[j]);
                        if first.as_deref().is_some_and(|f| f != a.as_str())
                            || second.as_deref().is_some_and(|s| s != b.as_str())
                        {
                            continue;
                        }
                        if !seen.insert((i, j, a.clone(), b.clone())) {
                            continue;
                        }
                        let n: u64 = table
                            .pair_counts(i, j, a, b)
                            .map_or(0, |c| c.values().sum());
                        let d = table.pair_distribution(i, j, a, b).unwrap_or_default();
                        let dist: Vec<String> =
                            d.iter().map(|(t, p)| format!("{t} {p:.4}")).collect();
                        outln!("{}={a} {}={b} n={n}: {}", ids[i], ids[j], dist.join(", "));
                    }
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
