//! Token-aligned suggestions of several taggers.

use crate::error::{Error, Result};

use super::{split_by_cycle, Tag, TaggedCorpus};

/// One tagger's output: tags grouped per utterance.
pub type TagColumn = Vec<Vec<Tag>>;

const HEADER_PREFIX: &str = "#matrix";
const GOLD_MARKER: &str = "@gold";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixRow {
    pub token: String,
    pub suggestions: Vec<Tag>,
    pub gold: Option<Tag>,
}

/// Per-token suggestions of N taggers, optionally with the benchmark tag.
///
/// Every row carries exactly one suggestion per tagger and either all rows
/// or none carry a gold tag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggerMatrix {
    tagger_ids: Vec<String>,
    rows: Vec<MatrixRow>,
    starts: Vec<usize>,
}

impl TaggerMatrix {
    pub fn new(tagger_ids: Vec<String>, utterances: Vec<Vec<MatrixRow>>) -> Result<TaggerMatrix> {
        let mut rows = Vec::new();
        let mut starts = Vec::new();
        let with_gold = utterances
            .iter()
            .flatten()
            .next()
            .is_some_and(|r| r.gold.is_some());
        for utt in utterances.into_iter().filter(|u| !u.is_empty()) {
            starts.push(rows.len());
            for row in utt {
                if row.suggestions.len() != tagger_ids.len() {
                    return Err(Error::Alignment {
                        column: "*".into(),
                        row: rows.len(),
                        message: format!(
                            "{} suggestions for {} taggers",
                            row.suggestions.len(),
                            tagger_ids.len()
                        ),
                    });
                }
                if row.gold.is_some() != with_gold {
                    return Err(Error::Alignment {
                        column: "gold".into(),
                        row: rows.len(),
                        message: "gold tags present on some rows only".into(),
                    });
                }
                rows.push(row);
            }
        }
        Ok(TaggerMatrix {
            tagger_ids,
            rows,
            starts,
        })
    }

    pub fn tagger_ids(&self) -> &[String] {
        &self.tagger_ids
    }

    pub fn num_taggers(&self) -> usize {
        self.tagger_ids.len()
    }

    pub fn rows(&self) -> &[MatrixRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn has_gold(&self) -> bool {
        self.rows.first().is_some_and(|r| r.gold.is_some())
    }

    pub fn num_utterances(&self) -> usize {
        self.starts.len()
    }

    /// Row ranges of the utterances.
    pub fn utterance_ranges(&self) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        self.starts.iter().enumerate().map(move |(i, &s)| {
            let e = self.starts.get(i + 1).copied().unwrap_or(self.rows.len());
            s..e
        })
    }

    pub fn is_utterance_start(&self, row: usize) -> bool {
        self.starts.binary_search(&row).is_ok()
    }

    pub fn is_utterance_end(&self, row: usize) -> bool {
        row + 1 == self.rows.len() || self.is_utterance_start(row + 1)
    }

    /// The row before `row` in the same utterance.
    pub fn prev_in_utterance(&self, row: usize) -> Option<&MatrixRow> {
        if self.is_utterance_start(row) {
            None
        } else {
            self.rows.get(row.wrapping_sub(1))
        }
    }

    pub fn next_in_utterance(&self, row: usize) -> Option<&MatrixRow> {
        if self.is_utterance_end(row) {
            None
        } else {
            self.rows.get(row + 1)
        }
    }

    /// Gold tags of all rows, or [`Error::MissingGold`].
    pub fn golds(&self) -> Result<Vec<&Tag>> {
        self.rows
            .iter()
            .map(|r| r.gold.as_ref().ok_or(Error::MissingGold))
            .collect()
    }

    pub fn column(&self, tagger: usize) -> Vec<Tag> {
        self.rows
            .iter()
            .map(|r| r.suggestions[tagger].clone())
            .collect()
    }

    pub fn tagger_index(&self, id: &str) -> Option<usize> {
        self.tagger_ids.iter().position(|t| t == id)
    }

    /// Restricts the matrix to the given taggers, in the given order.
    pub fn select_taggers(&self, taggers: &[usize]) -> TaggerMatrix {
        TaggerMatrix {
            tagger_ids: taggers
                .iter()
                .map(|&i| self.tagger_ids[i].clone())
                .collect(),
            rows: self
                .rows
                .iter()
                .map(|r| MatrixRow {
                    token: r.token.clone(),
                    suggestions: taggers.iter().map(|&i| r.suggestions[i].clone()).collect(),
                    gold: r.gold.clone(),
                })
                .collect(),
            starts: self.starts.clone(),
        }
    }

    fn utterance_rows(&self) -> Vec<Vec<MatrixRow>> {
        self.utterance_ranges()
            .map(|r| self.rows[r].to_vec())
            .collect()
    }

    /// Same Train/Tune/Test partition as [`TaggedCorpus::split`].
    pub fn split(&self) -> (TaggerMatrix, TaggerMatrix, TaggerMatrix) {
        let [a, b, c] = split_by_cycle(&self.utterance_rows());
        let ids = self.tagger_ids.clone();
        let build = |u: Vec<Vec<MatrixRow>>| {
            TaggerMatrix::new(ids.clone(), u).expect("split preserves matrix invariants")
        };
        (build(a), build(b), build(c))
    }

    /// Gold-tagged corpus, if gold tags are present.
    pub fn to_corpus(&self) -> Result<TaggedCorpus> {
        let mut utts = Vec::new();
        for range in self.utterance_ranges() {
            let mut utt = Vec::new();
            for row in &self.rows[range] {
                utt.push(super::TaggedToken {
                    token: row.token.clone(),
                    tag: row.gold.clone().ok_or(Error::MissingGold)?,
                });
            }
            utts.push(utt);
        }
        Ok(TaggedCorpus::new(utts))
    }

    /// Matrix file: a `#matrix` header naming the taggers (and `@gold` when
    /// gold tags are present), then `token<TAB>s_1…s_N[<TAB>gold]` rows with
    /// blank lines between utterances.
    pub fn to_text(&self) -> String {
        let mut out = String::from(HEADER_PREFIX);
        for id in &self.tagger_ids {
            out.push('\t');
            out.push_str(id);
        }
        if self.has_gold() {
            out.push('\t');
            out.push_str(GOLD_MARKER);
        }
        out.push('\n');
        for (u, range) in self.utterance_ranges().enumerate() {
            if u > 0 {
                out.push('\n');
            }
            for row in &self.rows[range] {
                out.push_str(&row.token);
                for s in &row.suggestions {
                    out.push('\t');
                    out.push_str(s.as_str());
                }
                if let Some(g) = &row.gold {
                    out.push('\t');
                    out.push_str(g.as_str());
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<TaggerMatrix> {
        let mut lines = text.lines().enumerate();
        let header = loop {
            match lines.next() {
                Some((_, l)) if l.trim().is_empty() => continue,
                Some((i, l)) => break (i, l.strip_suffix('\r').unwrap_or(l)),
                None => return Err(Error::EmptyInput),
            }
        };
        let mut fields: Vec<&str> = header.1.split('\t').collect();
        if fields.first() != Some(&HEADER_PREFIX) {
            return Err(Error::Parse {
                line: header.0 + 1,
                message: format!("expected '{}' header", HEADER_PREFIX),
            });
        }
        fields.remove(0);
        let with_gold = fields.last() == Some(&GOLD_MARKER);
        if with_gold {
            fields.pop();
        }
        let ids: Vec<String> = fields.iter().map(|s| s.to_string()).collect();
        let width = 1 + ids.len() + usize::from(with_gold);

        let mut utts = Vec::new();
        let mut current = Vec::new();
        for (idx, raw) in lines {
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.is_empty() {
                if !current.is_empty() {
                    utts.push(std::mem::take(&mut current));
                }
                continue;
            }
            let err = |message: String| Error::Parse {
                line: idx + 1,
                message,
            };
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != width {
                return Err(err(format!("expected {} fields, found {}", width, f.len())));
            }
            let tags = f[1..]
                .iter()
                .map(|s| Tag::parse(s))
                .collect::<Result<Vec<Tag>>>()
                .map_err(|e| err(e.to_string()))?;
            let (suggestions, gold) = if with_gold {
                let (s, g) = tags.split_at(ids.len());
                (s.to_vec(), Some(g[0].clone()))
            } else {
                (tags, None)
            };
            current.push(MatrixRow {
                token: f[0].to_owned(),
                suggestions,
                gold,
            });
        }
        if !current.is_empty() {
            utts.push(current);
        }
        TaggerMatrix::new(ids, utts)
    }
}

/// Parses a tag-column file: one tag per line, blank lines between
/// utterances.
pub fn parse_column(text: &str) -> Result<TagColumn> {
    let mut utts = Vec::new();
    let mut current = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() {
            if !current.is_empty() {
                utts.push(std::mem::take(&mut current));
            }
            continue;
        }
        current.push(Tag::parse(line).map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?);
    }
    if !current.is_empty() {
        utts.push(current);
    }
    Ok(utts)
}

pub fn serialize_column(column: &[Vec<Tag>]) -> String {
    let mut out = String::new();
    for (i, utt) in column.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for t in utt {
            out.push_str(t.as_str());
            out.push('\n');
        }
    }
    out
}

/// Attaches tagger output columns to a gold-tagged benchmark.
pub fn align_outputs(
    benchmark: &TaggedCorpus,
    columns: &[TagColumn],
    tagger_ids: &[String],
) -> Result<TaggerMatrix> {
    if columns.len() != tagger_ids.len() {
        return Err(Error::InvalidParameter(format!(
            "{} columns for {} tagger ids",
            columns.len(),
            tagger_ids.len()
        )));
    }
    let total = benchmark.num_tokens();
    for (col, id) in columns.iter().zip(tagger_ids) {
        let mut row = 0;
        for (u, utt) in benchmark.utterances().iter().enumerate() {
            let Some(col_utt) = col.get(u) else {
                return Err(Error::Alignment {
                    column: id.clone(),
                    row,
                    message: format!("column ends before utterance {}", u + 1),
                });
            };
            if col_utt.len() != utt.len() {
                return Err(Error::Alignment {
                    column: id.clone(),
                    row: row + utt.len().min(col_utt.len()),
                    message: format!(
                        "utterance {} has {} tags, benchmark has {} tokens",
                        u + 1,
                        col_utt.len(),
                        utt.len()
                    ),
                });
            }
            row += utt.len();
        }
        if col.len() > benchmark.utterances().len() {
            return Err(Error::Alignment {
                column: id.clone(),
                row: total,
                message: "extra tags after the benchmark's last token".into(),
            });
        }
    }

    let utts = benchmark
        .utterances()
        .iter()
        .enumerate()
        .map(|(u, utt)| {
            utt.iter()
                .enumerate()
                .map(|(k, tt)| MatrixRow {
                    token: tt.token.clone(),
                    suggestions: columns.iter().map(|c| c[u][k].clone()).collect(),
                    gold: Some(tt.tag.clone()),
                })
                .collect()
        })
        .collect();
    TaggerMatrix::new(tagger_ids.to_vec(), utts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TaggedToken;

    fn bench() -> TaggedCorpus {
        TaggedCorpus::new(vec![
            vec![TaggedToken::new("a", "X"), TaggedToken::new("b", "Y")],
            vec![TaggedToken::new("c", "Z")],
        ])
    }

    fn gold_column(c: &TaggedCorpus) -> TagColumn {
        c.utterances()
            .iter()
            .map(|u| u.iter().map(|t| t.tag.clone()).collect())
            .collect()
    }

    #[test]
    fn identical_column() {
        let b = bench();
        let m = align_outputs(&b, &[gold_column(&b)], &["g".into()]).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.num_utterances(), 2);
        for row in m.rows() {
            assert_eq!(Some(&row.suggestions[0]), row.gold.as_ref());
        }
    }

    #[test]
    fn longer_column_fails_at_final_row() {
        let b = bench();
        let mut col = gold_column(&b);
        col[1].push(Tag::new("Z"));
        match align_outputs(&b, &[col], &["long".into()]) {
            Err(Error::Alignment { column, row, .. }) => {
                assert_eq!(column, "long");
                assert_eq!(row, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
        let mut col = gold_column(&b);
        col.push(vec![Tag::new("Q")]);
        assert!(matches!(
            align_outputs(&b, &[col], &["extra".into()]),
            Err(Error::Alignment { row: 3, .. })
        ));
    }

    #[test]
    fn boundary_mismatch_is_error() {
        let b = bench();
        let col = vec![vec![Tag::new("X")], vec![Tag::new("Y"), Tag::new("Z")]];
        match align_outputs(&b, &[col], &["shifted".into()]) {
            Err(Error::Alignment { column, row, .. }) => {
                assert_eq!(column, "shifted");
                assert_eq!(row, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn matrix_text_round_trip() {
        let b = bench();
        let m = align_outputs(
            &b,
            &[gold_column(&b), gold_column(&b)],
            &["A".into(), "B".into()],
        )
        .unwrap();
        let text = m.to_text();
        assert!(text.starts_with("#matrix\tA\tB\t@gold\n"));
        assert_eq!(TaggerMatrix::parse(&text).unwrap(), m);
    }

    #[test]
    fn utterance_navigation() {
        let b = bench();
        let m = align_outputs(&b, &[gold_column(&b)], &["g".into()]).unwrap();
        assert!(m.prev_in_utterance(0).is_none());
        assert_eq!(m.next_in_utterance(0).unwrap().token, "b");
        assert!(m.next_in_utterance(1).is_none());
        assert!(m.prev_in_utterance(2).is_none());
        assert!(m.is_utterance_end(2));
    }

    #[test]
    fn column_round_trip() {
        let b = bench();
        let col = gold_column(&b);
        assert_eq!(parse_column(&serialize_column(&col)).unwrap(), col);
    }
}
