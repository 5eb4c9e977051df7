//! Tagger M: a memory-based tagger with separate case bases for known and
//! unknown words.

use serde::{Deserialize, Serialize};

use crate::corpus::{Lexicon, Tag, TaggedCorpus};
use crate::error::Result;

use super::{Case, CaseBase, CaseBaseData, Classification, Metric};

/// Out-of-bounds symbol left of an utterance.
pub const BOUNDARY_LEFT: &str = "<s>";
/// Out-of-bounds symbol right of an utterance.
pub const BOUNDARY_RIGHT: &str = "</s>";
/// Filler for suffix letters of words shorter than three characters.
pub const SUFFIX_PAD: &str = "<pad>";

pub const KNOWN_SCHEMA: [&str; 5] = ["tag-1", "tag-2", "word", "class+1", "class+2"];
pub const UNKNOWN_SCHEMA: [&str; 8] = [
    "tag-1", "class+1", "suffix-3", "suffix-2", "suffix-1", "capital", "hyphen", "digit",
];

/// Tokens seen at most this often in Train populate the unknown-word base.
pub const RARE_TOKEN_MAX_FREQ: u64 = 2;

fn context_class(lexicon: &Lexicon, tokens: &[&str], pos: usize) -> String {
    match tokens.get(pos) {
        Some(t) => lexicon.ambiguity_class(t),
        None => BOUNDARY_RIGHT.to_owned(),
    }
}

/// Known-word features: disambiguated tags at −1 and −2, the word itself, and
/// the ambiguity classes at +1 and +2.
pub fn known_features(
    lexicon: &Lexicon,
    tokens: &[&str],
    pos: usize,
    left1: Option<&Tag>,
    left2: Option<&Tag>,
) -> Vec<String> {
    let tag = |t: Option<&Tag>| t.map_or(BOUNDARY_LEFT.to_owned(), |t| t.to_string());
    vec![
        tag(left1),
        tag(left2),
        tokens[pos].to_owned(),
        context_class(lexicon, tokens, pos + 1),
        context_class(lexicon, tokens, pos + 2),
    ]
}

/// Unknown-word features: tag at −1, ambiguity class at +1, the last three
/// letters, and capital/hyphen/digit flags.
pub fn unknown_features(
    lexicon: &Lexicon,
    tokens: &[&str],
    pos: usize,
    left1: Option<&Tag>,
) -> Vec<String> {
    let word = tokens[pos];
    let chars: Vec<char> = word.chars().collect();
    let letter = |back: usize| {
        if chars.len() >= back {
            chars[chars.len() - back].to_string()
        } else {
            SUFFIX_PAD.to_owned()
        }
    };
    let flag = |b: bool| if b { "1" } else { "0" }.to_owned();
    vec![
        left1.map_or(BOUNDARY_LEFT.to_owned(), |t| t.to_string()),
        context_class(lexicon, tokens, pos + 1),
        letter(3),
        letter(2),
        letter(1),
        flag(chars.iter().any(|c| c.is_uppercase())),
        flag(chars.contains(&'-')),
        flag(chars.iter().any(|c| c.is_ascii_digit())),
    ]
}

fn unknown_cases(train: &TaggedCorpus, lexicon: &Lexicon, max_freq: Option<u64>) -> Vec<Case> {
    let mut cases = Vec::new();
    for utt in train.utterances() {
        let tokens: Vec<&str> = utt.iter().map(|t| t.token.as_str()).collect();
        for (i, tt) in utt.iter().enumerate() {
            if max_freq.is_none_or(|m| lexicon.token_freq(&tt.token) <= m) {
                let l1 = i.checked_sub(1).map(|j| &utt[j].tag);
                cases.push(Case {
                    features: unknown_features(lexicon, &tokens, i, l1),
                    label: tt.tag.clone(),
                });
            }
        }
    }
    cases
}

fn schema(names: &[&str]) -> Vec<String> {
    names.iter().map(|x| x.to_string()).collect()
}

/// Proposes tag distributions for words missing from the lexicon, from a
/// case base of rare Train tokens.
#[derive(Clone, Debug)]
pub struct UnknownWordGuesser {
    lexicon: Lexicon,
    base: CaseBase,
}

#[derive(Serialize, Deserialize)]
struct GuesserData {
    lexicon: Lexicon,
    base: CaseBaseData,
}

impl UnknownWordGuesser {
    pub fn train(train: &TaggedCorpus) -> Result<UnknownWordGuesser> {
        let lexicon = Lexicon::from_corpus(train);
        UnknownWordGuesser::with_lexicon(train, lexicon)
    }

    fn with_lexicon(train: &TaggedCorpus, lexicon: Lexicon) -> Result<UnknownWordGuesser> {
        let mut cases = unknown_cases(train, &lexicon, Some(RARE_TOKEN_MAX_FREQ));
        // A corpus without rare tokens still needs an unknown-word model.
        if cases.is_empty() {
            cases = unknown_cases(train, &lexicon, None);
        }
        let base = CaseBase::build(schema(&UNKNOWN_SCHEMA), cases, Metric::InformationGain)?;
        Ok(UnknownWordGuesser { lexicon, base })
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn base(&self) -> &CaseBase {
        &self.base
    }

    /// Tag distribution for `tokens[pos]` given the tag to its left
    /// (`None` at the utterance start).
    pub fn guess(&self, tokens: &[&str], pos: usize, left: Option<&Tag>) -> Result<Classification> {
        self.base
            .classify(&unknown_features(&self.lexicon, tokens, pos, left))
    }
}

/// Tagger M.
#[derive(Clone, Debug)]
pub struct MbTagger {
    guesser: UnknownWordGuesser,
    known: CaseBase,
}

#[derive(Serialize, Deserialize)]
struct MbTaggerData {
    lexicon: Lexicon,
    known: CaseBaseData,
    unknown: CaseBaseData,
}

impl MbTagger {
    pub fn train(train: &TaggedCorpus) -> Result<MbTagger> {
        let lexicon = Lexicon::from_corpus(train);
        let mut known = Vec::new();
        for utt in train.utterances() {
            let tokens: Vec<&str> = utt.iter().map(|t| t.token.as_str()).collect();
            for (i, tt) in utt.iter().enumerate() {
                let l1 = i.checked_sub(1).map(|j| &utt[j].tag);
                let l2 = i.checked_sub(2).map(|j| &utt[j].tag);
                known.push(Case {
                    features: known_features(&lexicon, &tokens, i, l1, l2),
                    label: tt.tag.clone(),
                });
            }
        }
        let known = CaseBase::build(schema(&KNOWN_SCHEMA), known, Metric::InformationGain)?;
        Ok(MbTagger {
            guesser: UnknownWordGuesser::with_lexicon(train, lexicon)?,
            known,
        })
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.guesser.lexicon
    }

    pub fn known_base(&self) -> &CaseBase {
        &self.known
    }

    pub fn unknown_base(&self) -> &CaseBase {
        &self.guesser.base
    }

    pub fn guesser(&self) -> &UnknownWordGuesser {
        &self.guesser
    }

    pub fn propose_unknown(
        &self,
        tokens: &[&str],
        pos: usize,
        left: Option<&Tag>,
    ) -> Result<Classification> {
        self.guesser.guess(tokens, pos, left)
    }

    /// Tags one utterance left to right; earlier decisions feed the left
    /// context of later positions.
    pub fn tag(&self, tokens: &[&str]) -> Result<Vec<Tag>> {
        let lexicon = self.lexicon();
        let mut out: Vec<Tag> = Vec::with_capacity(tokens.len());
        for i in 0..tokens.len() {
            let l1 = i.checked_sub(1).map(|j| &out[j]);
            let l2 = i.checked_sub(2).map(|j| &out[j]);
            let result = if lexicon.is_known(tokens[i]) {
                self.known
                    .classify(&known_features(lexicon, tokens, i, l1, l2))?
            } else {
                self.guesser.guess(tokens, i, l1)?
            };
            out.push(result.label);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&MbTaggerData {
            lexicon: self.guesser.lexicon.clone(),
            known: self.known.to_data(),
            unknown: self.guesser.base.to_data(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<MbTagger> {
        let data: MbTaggerData = serde_json::from_str(text)?;
        Ok(MbTagger {
            guesser: UnknownWordGuesser {
                lexicon: data.lexicon,
                base: CaseBase::from_data(data.unknown)?,
            },
            known: CaseBase::from_data(data.known)?,
        })
    }
}

impl Serialize for UnknownWordGuesser {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GuesserData {
            lexicon: self.lexicon.clone(),
            base: self.base.to_data(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnknownWordGuesser {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let data = GuesserData::deserialize(d)?;
        Ok(UnknownWordGuesser {
            lexicon: data.lexicon,
            base: CaseBase::from_data(data.base).map_err(serde::de::Error::custom)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TaggedToken;

    #[test]
    fn word_shape_features() {
        let lex = Lexicon::default();
        let f = unknown_features(&lex, &["Anti-War"], 0, None);
        assert_eq!(f[0], BOUNDARY_LEFT);
        assert_eq!(f[1], BOUNDARY_RIGHT);
        assert_eq!(&f[2..5], &["W", "a", "r"]);
        assert_eq!(&f[5..], &["1", "1", "0"]);
        let g = unknown_features(&lex, &["a1"], 0, None);
        assert_eq!(&g[2..5], &[SUFFIX_PAD, "a", "1"]);
        assert_eq!(g[7], "1");
    }

    #[test]
    fn three_tokens_three_cases() {
        let c = TaggedCorpus::new(vec![vec![
            TaggedToken::new("a", "X"),
            TaggedToken::new("b", "Y"),
            TaggedToken::new("c", "Z"),
        ]]);
        let m = MbTagger::train(&c).unwrap();
        assert_eq!(m.known_base().cases().len(), 3);
        assert_eq!(m.tag(&["a", "b", "c"]).unwrap(), c.gold_tags());
    }

    #[test]
    fn unknown_at_start_sees_boundary() {
        let c = TaggedCorpus::new(vec![vec![
            TaggedToken::new("The", "AT"),
            TaggedToken::new("dog", "NN"),
        ]]);
        let m = MbTagger::train(&c).unwrap();
        let f = unknown_features(m.lexicon(), &["Zork", "dog"], 0, None);
        assert_eq!(f[0], BOUNDARY_LEFT);
        assert_eq!(f[1], "NN");
        let dist = m.propose_unknown(&["Zork", "dog"], 0, None).unwrap();
        let total: f64 = dist.distribution.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn json_round_trip() {
        let c = TaggedCorpus::new(vec![vec![
            TaggedToken::new("a", "X"),
            TaggedToken::new("b", "Y"),
        ]]);
        let m = MbTagger::train(&c).unwrap();
        let back = MbTagger::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(
            back.tag(&["b", "a", "q"]).unwrap(),
            m.tag(&["b", "a", "q"]).unwrap()
        );
    }
}
