//! Tagged corpora in vertical format, the 8/1/1 split and the lexicon.
//!
//! The interchange format is one `token<TAB>tag` pair per line with a single
//! blank line between utterances.

mod lexicon;
mod matrix;

use std::borrow::Borrow;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use lexicon::{Lexicon, Novelty};
pub use matrix::{
    align_outputs, parse_column, serialize_column, MatrixRow, TagColumn, TaggerMatrix,
};

/// A wordclass tag. Ditto tags such as `CC-1` are ordinary tags.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tag(Arc<str>);

impl Tag {
    /// Builds a tag from a literal.
    ///
    /// Panics if `name` is empty or contains whitespace; use [`Tag::parse`]
    /// for untrusted input.
    pub fn new(name: &str) -> Tag {
        Tag::parse(name).unwrap_or_else(|_| panic!("invalid tag literal {:?}", name))
    }

    pub fn parse(name: &str) -> Result<Tag> {
        if name.is_empty() {
            return Err(Error::InvalidParameter("empty tag".into()));
        }
        if name.chars().any(char::is_whitespace) {
            return Err(Error::InvalidParameter(format!(
                "tag {:?} contains whitespace",
                name
            )));
        }
        Ok(Tag(Arc::from(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for Tag {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for Tag {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl Serialize for Tag {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Tag {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Tag, D::Error> {
        let s = String::deserialize(deserializer)?;
        Tag::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggedToken {
    pub token: String,
    pub tag: Tag,
}

impl TaggedToken {
    pub fn new(token: &str, tag: &str) -> TaggedToken {
        TaggedToken {
            token: token.to_owned(),
            tag: Tag::new(tag),
        }
    }
}

pub type Utterance = Vec<TaggedToken>;

/// A sequence of non-empty utterances of (token, gold tag) pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TaggedCorpus {
    utterances: Vec<Utterance>,
}

impl TaggedCorpus {
    /// Wraps utterances, dropping empty ones.
    pub fn new(utterances: Vec<Utterance>) -> TaggedCorpus {
        TaggedCorpus {
            utterances: utterances.into_iter().filter(|u| !u.is_empty()).collect(),
        }
    }

    /// Parses the vertical format.
    pub fn parse(text: &str) -> Result<TaggedCorpus> {
        let mut utterances = Vec::new();
        let mut current = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.is_empty() {
                if !current.is_empty() {
                    utterances.push(std::mem::take(&mut current));
                }
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected 2 tab-separated fields, found {}", fields.len()),
                });
            }
            if fields[0].is_empty() {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: "empty token".into(),
                });
            }
            let tag = Tag::parse(fields[1]).map_err(|e| Error::Parse {
                line: idx + 1,
                message: e.to_string(),
            })?;
            current.push(TaggedToken {
                token: fields[0].to_owned(),
                tag,
            });
        }
        if !current.is_empty() {
            utterances.push(current);
        }
        if utterances.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(TaggedCorpus { utterances })
    }

    pub fn to_vertical(&self) -> String {
        let mut out = String::new();
        for (i, utt) in self.utterances.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            for tt in utt {
                out.push_str(&tt.token);
                out.push('\t');
                out.push_str(tt.tag.as_str());
                out.push('\n');
            }
        }
        out
    }

    pub fn utterances(&self) -> &[Utterance] {
        &self.utterances
    }

    pub fn is_empty(&self) -> bool {
        self.utterances.is_empty()
    }

    pub fn num_tokens(&self) -> usize {
        self.utterances.iter().map(Vec::len).sum()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &TaggedToken> {
        self.utterances.iter().flatten()
    }

    pub fn gold_tags(&self) -> Vec<Tag> {
        self.tokens().map(|t| t.tag.clone()).collect()
    }

    /// Token strings grouped per utterance.
    pub fn words(&self) -> Vec<Vec<String>> {
        self.utterances
            .iter()
            .map(|u| u.iter().map(|t| t.token.clone()).collect())
            .collect()
    }

    /// Splits into (Train, Tune, Test) by utterance index modulo ten.
    pub fn split(&self) -> (TaggedCorpus, TaggedCorpus, TaggedCorpus) {
        let [train, tune, test] = split_by_cycle(&self.utterances);
        (
            TaggedCorpus { utterances: train },
            TaggedCorpus { utterances: tune },
            TaggedCorpus { utterances: test },
        )
    }
}

/// Which split an utterance at `index` belongs to: 0 = Train, 1 = Tune,
/// 2 = Test.
pub fn split_part(index: usize) -> usize {
    match index % 10 {
        0..=7 => 0,
        8 => 1,
        _ => 2,
    }
}

/// Distributes items over Train/Tune/Test: the first eight of every ten go
/// to Train, the ninth to Tune and the tenth to Test.
pub fn split_by_cycle<T: Clone>(items: &[T]) -> [Vec<T>; 3] {
    let mut parts: [Vec<T>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for (i, item) in items.iter().enumerate() {
        parts[split_part(i)].push(item.clone());
    }
    parts
}
