//! Knowledge-base store: entity records, the normalized alias index, the
//! hyperlink graph and the document frequencies used for TF-IDF weighting.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{content_terms, Normalizer};

/// Reserved gold/prediction marker; never a valid entity id.
pub const NIL: &str = "NIL";

#[derive(Debug, Error)]
pub enum KbError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed record at line {line}: {message}")]
    MalformedRecord { line: usize, message: String },
    #[error("duplicate entity id `{0}`")]
    DuplicateEntityId(String),
    #[error("invalid reference lists: {0}")]
    InvalidLists(String),
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NerType {
    Per,
    Loc,
    Org,
    Work,
    Other,
    #[default]
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PosCategory {
    ProperNoun,
    CommonNoun,
    Other,
    #[default]
    Unknown,
}

macro_rules! serde_str_enum {
    ($ty:ty) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let v = serde_json::to_value(self).map_err(|_| fmt::Error)?;
                f.write_str(v.as_str().unwrap_or_default())
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                serde_json::from_value(serde_json::Value::String(s.to_owned()))
                    .map_err(|_| format!("unknown {} `{s}`", stringify!($ty)))
            }
        }
    };
}

serde_str_enum!(NerType);
serde_str_enum!(PosCategory);

/// One entity as it appears in a dump line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub id: String,
    #[serde(rename = "label")]
    pub canonical_label: String,
    #[serde(rename = "variants", default)]
    pub variant_labels: BTreeSet<String>,
    #[serde(rename = "class")]
    pub kb_class: String,
    #[serde(default)]
    pub ner_type: NerType,
    #[serde(rename = "pos", default)]
    pub pos_category: PosCategory,
    #[serde(rename = "article", default)]
    pub article_text: String,
    #[serde(rename = "links", default)]
    pub out_links: BTreeSet<String>,
    #[serde(default)]
    pub rare: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassFilter {
    pub triggers: BTreeSet<String>,
    pub penalty: f64,
}

/// Hand-curated lists driving the filters and stopword removal.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReferenceLists {
    #[serde(default)]
    pub rare_blocklist: BTreeSet<String>,
    #[serde(default)]
    pub class_filters: BTreeMap<String, ClassFilter>,
    #[serde(default)]
    pub type_mapping: BTreeMap<NerType, BTreeSet<String>>,
    #[serde(default)]
    pub stopwords: BTreeSet<String>,
}

impl ReferenceLists {
    pub fn from_json(s: &str) -> Result<Self, KbError> {
        serde_json::from_str(s).map_err(|e| KbError::InvalidLists(e.to_string()))
    }

    /// Validates penalties and normalizes stopwords and trigger terms.
    pub fn prepare(mut self, normalizer: Normalizer) -> Result<Self, KbError> {
        for (class, filter) in &mut self.class_filters {
            if !(filter.penalty > 0.0 && filter.penalty < 1.0) {
                return Err(KbError::InvalidLists(format!(
                    "penalty for class `{class}` must lie strictly between 0 and 1, got {}",
                    filter.penalty
                )));
            }
            filter.triggers = normalize_set(&filter.triggers, normalizer);
        }
        self.stopwords = normalize_set(&self.stopwords, normalizer);
        Ok(self)
    }
}

fn normalize_set(set: &BTreeSet<String>, normalizer: Normalizer) -> BTreeSet<String> {
    set.iter()
        .map(|s| normalizer.normalize(s))
        .filter(|s| !s.is_empty())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeBase {
    pub entities: BTreeMap<String, EntityRecord>,
    pub alias_index: BTreeMap<String, BTreeSet<String>>,
    /// Number of entities with a non-empty article.
    pub doc_count: usize,
    pub doc_freq: BTreeMap<String, usize>,
    /// Stopword-filtered term counts of each entity's article.
    pub article_terms: BTreeMap<String, BTreeMap<String, u32>>,
    pub normalizer: Normalizer,
    /// Out-links dropped at load because their target is not in the dump.
    pub dangling_links: usize,
    max_alias_tokens: usize,
}

static EMPTY: BTreeSet<String> = BTreeSet::new();

impl KnowledgeBase {
    /// Indexes a set of records. Links to ids outside `records` are dropped
    /// and counted in `dangling_links`.
    pub fn build(
        records: Vec<EntityRecord>,
        lists: &ReferenceLists,
        normalizer: Normalizer,
    ) -> Result<Self, KbError> {
        let mut entities = BTreeMap::new();
        for rec in records {
            if entities.contains_key(&rec.id) {
                return Err(KbError::DuplicateEntityId(rec.id));
            }
            entities.insert(rec.id.clone(), rec);
        }

        let ids: BTreeSet<String> = entities.keys().cloned().collect();
        let mut dangling_links = 0;
        let mut alias_index: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut doc_freq: BTreeMap<String, usize> = BTreeMap::new();
        let mut article_terms = BTreeMap::new();
        let mut doc_count = 0;
        let mut max_alias_tokens = 0;

        for (id, rec) in entities.iter_mut() {
            let before = rec.out_links.len();
            rec.out_links.retain(|l| l != id);
            let self_links = before - rec.out_links.len();
            rec.out_links.retain(|l| ids.contains(l));
            dangling_links += before - self_links - rec.out_links.len();

            for label in std::iter::once(&rec.canonical_label).chain(&rec.variant_labels) {
                let key = normalizer.normalize(label);
                if key.is_empty() {
                    continue;
                }
                max_alias_tokens = max_alias_tokens.max(normalizer.tokenize(&key).len());
                alias_index.entry(key).or_default().insert(id.clone());
            }

            if rec.article_text.trim().is_empty() {
                continue;
            }
            doc_count += 1;
            let tokens = normalizer.tokenize(&rec.article_text);
            let mut tf: BTreeMap<String, u32> = BTreeMap::new();
            for term in content_terms(&tokens, &lists.stopwords) {
                *tf.entry(term.to_owned()).or_default() += 1;
            }
            for term in tf.keys() {
                *doc_freq.entry(term.clone()).or_default() += 1;
            }
            article_terms.insert(id.clone(), tf);
        }

        Ok(KnowledgeBase {
            entities,
            alias_index,
            doc_count,
            doc_freq,
            article_terms,
            normalizer,
            dangling_links,
            max_alias_tokens,
        })
    }

    /// Parses a line-delimited dump. Blank lines are skipped.
    pub fn parse_dump(
        dump: &str,
        lists: &ReferenceLists,
        normalizer: Normalizer,
    ) -> Result<Self, KbError> {
        let mut records = Vec::new();
        for (i, line) in dump.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            records.push(parse_record(line, i + 1)?);
        }
        Self::build(records, lists, normalizer)
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn entity(&self, id: &str) -> Option<&EntityRecord> {
        self.entities.get(id)
    }

    /// Candidate ids whose canonical or variant label normalizes to the same
    /// string as `surface`.
    pub fn lookup_alias(&self, surface: &str) -> &BTreeSet<String> {
        self.alias_index
            .get(&self.normalizer.normalize(surface))
            .unwrap_or(&EMPTY)
    }

    /// Undirected hyperlink test.
    pub fn link_exists(&self, a: &str, b: &str) -> Result<bool, KbError> {
        let ea = self.entities.get(a).ok_or_else(|| KbError::UnknownEntity(a.to_owned()))?;
        let eb = self.entities.get(b).ok_or_else(|| KbError::UnknownEntity(b.to_owned()))?;
        Ok(ea.out_links.contains(b) || eb.out_links.contains(a))
    }

    pub(crate) fn linked(&self, a: &str, b: &str) -> bool {
        self.link_exists(a, b).unwrap_or(false)
    }

    /// Longest alias length in tokens; bounds gazetteer spotting.
    pub fn max_alias_tokens(&self) -> usize {
        self.max_alias_tokens
    }

    pub fn idf(&self, term: &str, smooth: bool) -> f64 {
        let df = self.doc_freq.get(term).copied().unwrap_or(0) as f64;
        let n = self.doc_count as f64;
        if smooth {
            ((1.0 + n) / (1.0 + df)).ln() + 1.0
        } else if df > 0.0 {
            (n / df).ln()
        } else {
            0.0
        }
    }
}

fn parse_record(line: &str, line_no: usize) -> Result<EntityRecord, KbError> {
    let malformed = |message: String| KbError::MalformedRecord { line: line_no, message };
    let rec: EntityRecord = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
    if rec.id.trim().is_empty() {
        return Err(malformed("empty `id`".into()));
    }
    if rec.id == NIL {
        return Err(malformed(format!("`{NIL}` is reserved and cannot be an entity id")));
    }
    if rec.canonical_label.trim().is_empty() {
        return Err(malformed(format!("entity `{}` has an empty `label`", rec.id)));
    }
    Ok(rec)
}

/// Loads a dump and its reference lists from disk.
pub fn load_kb(
    dump_path: &Path,
    lists_path: &Path,
    normalizer: Normalizer,
) -> Result<(KnowledgeBase, ReferenceLists), KbError> {
    let read = |p: &Path| {
        fs::read_to_string(p).map_err(|source| KbError::Io { path: p.to_owned(), source })
    };
    let lists = ReferenceLists::from_json(&read(lists_path)?)?.prepare(normalizer)?;
    let kb = KnowledgeBase::parse_dump(&read(dump_path)?, &lists, normalizer)?;
    Ok((kb, lists))
}
