//! Annotated documents, prediction records and dataset statistics.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::{KnowledgeBase, NerType, PosCategory, NIL};
use crate::text::char_slice;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed document at line {line}: {message}")]
    MalformedDocument { line: usize, message: String },
    #[error("duplicate document id `{0}`")]
    DuplicateDocument(String),
    #[error("document `{0}` has overlapping mentions")]
    OverlappingMentions(String),
    #[error("document `{doc}` mention {mention}: span does not match its surface")]
    SpanMismatch { doc: String, mention: usize },
}

/// A gold annotation or a prediction: an entity id, or the explicit NIL marker.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum Gold {
    Entity(String),
    Nil,
}

impl Gold {
    pub fn entity(&self) -> Option<&str> {
        match self {
            Gold::Entity(id) => Some(id),
            Gold::Nil => None,
        }
    }
}

impl From<String> for Gold {
    fn from(s: String) -> Self {
        if s == NIL {
            Gold::Nil
        } else {
            Gold::Entity(s)
        }
    }
}

impl From<Gold> for String {
    fn from(g: Gold) -> Self {
        match g {
            Gold::Entity(id) => id,
            Gold::Nil => NIL.to_owned(),
        }
    }
}

impl fmt::Display for Gold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.entity().unwrap_or(NIL))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mention {
    pub start: usize,
    pub end: usize,
    pub surface: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ner_type: Option<NerType>,
    #[serde(rename = "pos", default, skip_serializing_if = "Option::is_none")]
    pub pos_tag: Option<PosCategory>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<Gold>,
}

impl Mention {
    pub fn new(start: usize, end: usize, surface: impl Into<String>) -> Self {
        Mention { start, end, surface: surface.into(), ner_type: None, pos_tag: None, gold: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(default)]
    pub category: String,
    pub text: String,
    #[serde(default)]
    pub mentions: Vec<Mention>,
}

impl Document {
    /// Checks the span invariants of every mention.
    pub fn validate(&self) -> Result<(), CorpusError> {
        let mut spans = Vec::with_capacity(self.mentions.len());
        for (i, m) in self.mentions.iter().enumerate() {
            let mismatch = || CorpusError::SpanMismatch { doc: self.id.clone(), mention: i };
            if m.start >= m.end {
                return Err(mismatch());
            }
            match char_slice(&self.text, m.start, m.end) {
                Some(slice) if slice == m.surface => {}
                _ => return Err(mismatch()),
            }
            spans.push((m.start, m.end));
        }
        spans.sort_unstable();
        if spans.windows(2).any(|w| w[1].0 < w[0].1) {
            return Err(CorpusError::OverlappingMentions(self.id.clone()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityEntry {
    pub id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedMention {
    pub start: usize,
    pub end: usize,
    pub surface: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ner_type: Option<NerType>,
    #[serde(rename = "pos", default, skip_serializing_if = "Option::is_none")]
    pub pos_tag: Option<PosCategory>,
    pub prediction: Gold,
    pub score: f64,
    #[serde(default)]
    pub ambiguity: Vec<AmbiguityEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedDocument {
    pub id: String,
    #[serde(default)]
    pub category: String,
    pub text: String,
    #[serde(default)]
    pub mentions: Vec<PredictedMention>,
}

fn parse_lines<T: DeserializeOwned>(s: &str) -> Result<Vec<(usize, T)>, CorpusError> {
    s.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map(|v| (i + 1, v))
                .map_err(|e| CorpusError::MalformedDocument { line: i + 1, message: e.to_string() })
        })
        .collect()
}

fn check_unique<'a>(ids: impl Iterator<Item = &'a str>) -> Result<(), CorpusError> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(CorpusError::DuplicateDocument(id.to_owned()));
        }
    }
    Ok(())
}

pub fn parse_corpus(s: &str) -> Result<Vec<Document>, CorpusError> {
    let docs: Vec<Document> = parse_lines(s)?.into_iter().map(|(_, d)| d).collect();
    check_unique(docs.iter().map(|d| d.id.as_str()))?;
    for d in &docs {
        d.validate()?;
    }
    Ok(docs)
}

pub fn parse_predictions(s: &str) -> Result<Vec<PredictedDocument>, CorpusError> {
    let docs: Vec<PredictedDocument> = parse_lines(s)?.into_iter().map(|(_, d)| d).collect();
    check_unique(docs.iter().map(|d| d.id.as_str()))?;
    Ok(docs)
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io { path: path.to_owned(), source })
}

pub fn load_corpus(path: &Path) -> Result<Vec<Document>, CorpusError> {
    parse_corpus(&read(path)?)
}

pub fn load_predictions(path: &Path) -> Result<Vec<PredictedDocument>, CorpusError> {
    parse_predictions(&read(path)?)
}

/// Writes one JSON object per line.
pub fn write_jsonl<T: Serialize, W: Write>(records: &[T], mut out: W) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Dataset statistics. Sentence counts are approximate: text is split on
/// `. ! ? ؟` and newlines, and segments without any word are ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub sentences: usize,
    pub words: usize,
    pub entities: usize,
    pub candidates: usize,
    pub words_per_article: f64,
    pub entities_per_article: f64,
    pub candidates_per_mention: f64,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl CorpusStats {
    fn from_counts(documents: usize, sentences: usize, words: usize, entities: usize, candidates: usize) -> Self {
        CorpusStats {
            documents,
            sentences,
            words,
            entities,
            candidates,
            words_per_article: ratio(words, documents),
            entities_per_article: ratio(entities, documents),
            candidates_per_mention: ratio(candidates, entities),
        }
    }

    /// Rows in the order `(label, formatted value)`.
    pub fn rows(&self) -> Vec<(&'static str, String)> {
        vec![
            ("Documents", self.documents.to_string()),
            ("Sentences", self.sentences.to_string()),
            ("Words", self.words.to_string()),
            ("Entities", self.entities.to_string()),
            ("Candidates", self.candidates.to_string()),
            ("Words per article", format!("{:.1}", self.words_per_article)),
            ("Entities per article", format!("{:.1}", self.entities_per_article)),
            ("Candidates per Entity mentions", format!("{:.1}", self.candidates_per_mention)),
        ]
    }

    pub fn render_table(&self) -> String {
        let rows = self.rows();
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0).max("Dataset".len());
        let mut out = format!("{:<width$}  {:>10}\n", "Dataset", "Count");
        for (k, v) in rows {
            out.push_str(&format!("{k:<width$}  {v:>10}\n"));
        }
        out
    }
}

fn count_sentences(text: &str, kb: &KnowledgeBase) -> usize {
    text.split(['.', '!', '?', '؟', '\n'])
        .filter(|seg| !kb.normalizer.tokenize(seg).is_empty())
        .count()
}

fn raw_counts(docs: &[&Document], kb: &KnowledgeBase) -> [usize; 5] {
    let mut c = [docs.len(), 0, 0, 0, 0];
    for d in docs {
        c[1] += count_sentences(&d.text, kb);
        c[2] += kb.normalizer.tokenize(&d.text).len();
        c[3] += d.mentions.len();
        c[4] += d.mentions.iter().map(|m| kb.lookup_alias(&m.surface).len()).sum::<usize>();
    }
    c
}

pub fn corpus_stats(docs: &[Document], kb: &KnowledgeBase) -> CorpusStats {
    let refs: Vec<&Document> = docs.iter().collect();
    let [d, s, w, e, c] = raw_counts(&refs, kb);
    CorpusStats::from_counts(d, s, w, e, c)
}

/// Per-category breakdown.
pub fn category_stats(docs: &[Document], kb: &KnowledgeBase) -> BTreeMap<String, CorpusStats> {
    let mut groups: BTreeMap<&str, Vec<&Document>> = BTreeMap::new();
    for d in docs {
        groups.entry(d.category.as_str()).or_default().push(d);
    }
    groups
        .into_iter()
        .map(|(cat, ds)| {
            let [d, s, w, e, c] = raw_counts(&ds, kb);
            (cat.to_owned(), CorpusStats::from_counts(d, s, w, e, c))
        })
        .collect()
}
