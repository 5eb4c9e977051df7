//! Component wordclass taggers and methods for combining their output.
//!
//! The crate covers the whole experimental pipeline: a vertical corpus
//! format with an 8/1/1 Train/Tune/Test split, a trigram tagger with Viterbi
//! decoding, a memory-based tagger, simple and pairwise voting, stacked
//! second-stage classifiers, and the evaluation measures used to compare
//! them (baselines, agreement patterns, oracle bounds, McNemar's test and
//! subset sweeps).

pub mod combine;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod mbl;
pub mod pairwise;
pub mod seed;
pub mod stacker;
pub mod synth;
pub mod trigram;
pub mod voting;

pub use corpus::{Lexicon, Tag, TaggedCorpus, TaggedToken, TaggerMatrix};
pub use error::{Error, Result};
