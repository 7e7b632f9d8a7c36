//! Candidate generation, heuristic filtering, context and graph scoring, and
//! selection with NIL abstention.
//!
//! For each mention the kept candidates are scored as
//!
//! ```text
//! combined = penalty * (lambda * context + (1 - lambda) * graph)
//! ```
//!
//! where `context` is the TF-IDF cosine between the mention's surrounding
//! text and the candidate's article, `graph` is the number of distinct
//! candidates of the document's *other* mentions the candidate is hyperlinked
//! with (scaled by the per-mention maximum), and `penalty` comes from the
//! class-specific filters. The best candidate is linked unless its score is
//! below `nil_threshold`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{AmbiguityEntry, Document, Mention, PredictedDocument, PredictedMention};
use crate::kb::{EntityRecord, KnowledgeBase, PosCategory, ReferenceLists};
use crate::text::{char_slice, content_terms, Token};

pub use crate::corpus::Gold as Decision;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterToggles {
    #[serde(rename = "type")]
    pub type_check: bool,
    pub pos: bool,
    pub popularity: bool,
    pub class: bool,
}

impl Default for FilterToggles {
    fn default() -> Self {
        FilterToggles { type_check: true, pos: true, popularity: true, class: true }
    }
}

impl FilterToggles {
    pub const NONE: FilterToggles =
        FilterToggles { type_check: false, pos: false, popularity: false, class: false };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkerConfig {
    /// Weight of the context score; `1 - lambda` goes to the graph score.
    pub lambda: f64,
    pub nil_threshold: f64,
    pub filters: FilterToggles,
    /// Tokens kept on each side of the mention; `None` uses the whole document.
    pub context_window: Option<usize>,
    /// Smoothed IDF `ln((1+N)/(1+df)) + 1`; plain `ln(N/df)` otherwise.
    pub smooth_idf: bool,
}

impl Default for LinkerConfig {
    fn default() -> Self {
        LinkerConfig {
            lambda: 0.5,
            nil_threshold: 0.05,
            filters: FilterToggles::default(),
            context_window: None,
            smooth_idf: true,
        }
    }
}

impl LinkerConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(format!("lambda must lie in [0, 1], got {}", self.lambda));
        }
        if !(self.nil_threshold >= 0.0 && self.nil_threshold.is_finite()) {
            return Err(format!("nil_threshold must be a finite value >= 0, got {}", self.nil_threshold));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub entity_id: String,
    pub context_score: f64,
    pub graph_score: f64,
    pub penalty: f64,
    pub combined: f64,
}

impl ScoredCandidate {
    pub fn new(entity_id: String, context: f64, graph: f64, penalty: f64, lambda: f64) -> Self {
        let combined = penalty * (lambda * context + (1.0 - lambda) * graph);
        ScoredCandidate { entity_id, context_score: context, graph_score: graph, penalty, combined }
    }
}

/// Descending by combined score, ascending entity id on ties.
fn rank_order(a: &ScoredCandidate, b: &ScoredCandidate) -> Ordering {
    b.combined.total_cmp(&a.combined).then_with(|| a.entity_id.cmp(&b.entity_id))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkResult {
    pub mention: usize,
    pub decision: Decision,
    pub score: f64,
    pub ambiguity_list: Vec<ScoredCandidate>,
}

/// Candidates that survived filtering, with their class penalties.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Filtered {
    pub kept: BTreeSet<String>,
    pub penalties: BTreeMap<String, f64>,
}

impl Filtered {
    pub fn penalty(&self, id: &str) -> f64 {
        self.penalties.get(id).copied().unwrap_or(1.0)
    }
}

pub fn generate_candidates(mention: &Mention, kb: &KnowledgeBase) -> BTreeSet<String> {
    kb.lookup_alias(&mention.surface).clone()
}

fn document_terms<'a>(doc_tokens: &'a [Token], lists: &ReferenceLists) -> BTreeSet<&'a str> {
    content_terms(doc_tokens, &lists.stopwords).into_iter().collect()
}

/// Type, POS, popularity and class filters, in that order. Filters only
/// remove candidates; the class filter keeps its candidates but may assign a
/// penalty below one.
pub fn filter_candidates(
    cands: &BTreeSet<String>,
    mention: &Mention,
    doc: &Document,
    kb: &KnowledgeBase,
    lists: &ReferenceLists,
    cfg: &LinkerConfig,
) -> Filtered {
    let tokens = kb.normalizer.tokenize(&doc.text);
    filter_with_terms(cands, mention, &document_terms(&tokens, lists), kb, lists, cfg.filters)
}

fn filter_with_terms(
    cands: &BTreeSet<String>,
    mention: &Mention,
    doc_terms: &BTreeSet<&str>,
    kb: &KnowledgeBase,
    lists: &ReferenceLists,
    filters: FilterToggles,
) -> Filtered {
    let allowed_classes = match mention.ner_type {
        Some(t) if filters.type_check => lists.type_mapping.get(&t),
        _ => None,
    };
    let pos = match mention.pos_tag {
        Some(p) if filters.pos && p != PosCategory::Unknown => Some(p),
        _ => None,
    };

    let mut out = Filtered::default();
    for id in cands {
        let Some(e) = kb.entity(id) else { continue };
        if allowed_classes.is_some_and(|allowed| !allowed.contains(&e.kb_class)) {
            continue;
        }
        if pos.is_some_and(|p| e.pos_category != PosCategory::Unknown && e.pos_category != p) {
            continue;
        }
        if filters.popularity && (e.rare || lists.rare_blocklist.contains(id)) {
            continue;
        }
        if filters.class {
            if let Some(cf) = lists.class_filters.get(&e.kb_class) {
                if !cf.triggers.iter().any(|t| doc_terms.contains(t.as_str())) {
                    out.penalties.insert(id.clone(), cf.penalty);
                }
            }
        }
        out.kept.insert(id.clone());
    }
    out
}

/// Stopword-filtered term counts of the mention's context: the document
/// minus the mention span, optionally narrowed to a token window.
pub fn context_terms(
    mention: &Mention,
    doc_tokens: &[Token],
    lists: &ReferenceLists,
    window: Option<usize>,
) -> BTreeMap<String, u32> {
    let overlaps = |t: &Token| t.start < mention.end && mention.start < t.end;
    let outside: Vec<&Token> = doc_tokens.iter().filter(|t| !overlaps(t)).collect();
    let selected: Vec<&Token> = match window {
        None => outside,
        Some(w) => {
            let split = outside.partition_point(|t| t.end <= mention.start);
            let lo = split.saturating_sub(w);
            let hi = (split + w).min(outside.len());
            outside[lo..hi].to_vec()
        }
    };
    let mut tf = BTreeMap::new();
    for t in selected {
        if !lists.stopwords.contains(&t.text) {
            *tf.entry(t.text.clone()).or_default() += 1;
        }
    }
    tf
}

/// Sparse TF-IDF cosine between two term-count bags.
pub fn tfidf_cosine(
    a: &BTreeMap<String, u32>,
    b: &BTreeMap<String, u32>,
    kb: &KnowledgeBase,
    smooth: bool,
) -> f64 {
    let norm = |v: &BTreeMap<String, u32>| {
        v.iter()
            .map(|(t, &c)| (c as f64 * kb.idf(t, smooth)).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: f64 = a
        .iter()
        .filter_map(|(t, &ca)| {
            b.get(t).map(|&cb| {
                let idf = kb.idf(t, smooth);
                ca as f64 * idf * cb as f64 * idf
            })
        })
        .sum();
    (dot / (na * nb)).clamp(0.0, 1.0)
}

pub fn context_score(
    mention: &Mention,
    doc: &Document,
    entity: &EntityRecord,
    kb: &KnowledgeBase,
    lists: &ReferenceLists,
    cfg: &LinkerConfig,
) -> f64 {
    let tokens = kb.normalizer.tokenize(&doc.text);
    let ctx = context_terms(mention, &tokens, lists, cfg.context_window);
    match kb.article_terms.get(&entity.id) {
        Some(article) => tfidf_cosine(&ctx, article, kb, cfg.smooth_idf),
        None => 0.0,
    }
}

/// Distinct candidates of other mentions that `candidate` is linked with.
pub fn graph_raw(
    candidate: &str,
    mention: usize,
    doc_candidates: &[BTreeSet<String>],
    kb: &KnowledgeBase,
) -> usize {
    let others: BTreeSet<&String> = doc_candidates
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != mention)
        .flat_map(|(_, c)| c)
        .collect();
    others.into_iter().filter(|o| kb.linked(candidate, o)).count()
}

/// Graph scores of every candidate of `mention`, scaled by the largest raw count.
pub fn graph_scores(
    mention: usize,
    doc_candidates: &[BTreeSet<String>],
    kb: &KnowledgeBase,
) -> BTreeMap<String, f64> {
    let raw: BTreeMap<String, usize> = doc_candidates[mention]
        .iter()
        .map(|c| (c.clone(), graph_raw(c, mention, doc_candidates, kb)))
        .collect();
    let max = raw.values().copied().max().unwrap_or(0);
    raw.into_iter()
        .map(|(c, r)| (c, if max == 0 { 0.0 } else { r as f64 / max as f64 }))
        .collect()
}

pub fn graph_score(
    candidate: &str,
    mention: usize,
    doc_candidates: &[BTreeSet<String>],
    kb: &KnowledgeBase,
) -> f64 {
    let raw = graph_raw(candidate, mention, doc_candidates, kb);
    let max = doc_candidates[mention]
        .iter()
        .map(|c| graph_raw(c, mention, doc_candidates, kb))
        .max()
        .unwrap_or(0)
        .max(raw);
    if max == 0 {
        0.0
    } else {
        raw as f64 / max as f64
    }
}

/// Scores the kept candidates of mention `index` and picks a winner or NIL.
/// `doc_candidates` must hold the filtered candidates of every mention.
pub fn rank_and_select(
    index: usize,
    doc: &Document,
    kb: &KnowledgeBase,
    lists: &ReferenceLists,
    cfg: &LinkerConfig,
    doc_candidates: &[Filtered],
) -> LinkResult {
    let tokens = kb.normalizer.tokenize(&doc.text);
    let kept: Vec<BTreeSet<String>> = doc_candidates.iter().map(|f| f.kept.clone()).collect();
    select(index, &doc.mentions[index], &tokens, kb, lists, cfg, doc_candidates, &kept)
}

#[allow(clippy::too_many_arguments)]
fn select(
    index: usize,
    mention: &Mention,
    tokens: &[Token],
    kb: &KnowledgeBase,
    lists: &ReferenceLists,
    cfg: &LinkerConfig,
    filtered: &[Filtered],
    kept: &[BTreeSet<String>],
) -> LinkResult {
    let ctx = context_terms(mention, tokens, lists, cfg.context_window);
    let graph = graph_scores(index, kept, kb);
    let mut scored: Vec<ScoredCandidate> = kept[index]
        .iter()
        .map(|id| {
            let context = kb
                .article_terms
                .get(id)
                .map_or(0.0, |article| tfidf_cosine(&ctx, article, kb, cfg.smooth_idf));
            let penalty = filtered[index].penalty(id);
            ScoredCandidate::new(id.clone(), context, graph[id], penalty, cfg.lambda)
        })
        .collect();
    scored.sort_by(rank_order);

    match scored.first() {
        Some(top) if top.combined >= cfg.nil_threshold => {
            let winner = scored.remove(0);
            LinkResult {
                mention: index,
                decision: Decision::Entity(winner.entity_id),
                score: winner.combined,
                ambiguity_list: scored,
            }
        }
        top => LinkResult {
            mention: index,
            decision: Decision::Nil,
            score: top.map_or(0.0, |t| t.combined),
            ambiguity_list: scored,
        },
    }
}

/// Runs the full pipeline over one document, one result per mention.
pub fn link_document(
    doc: &Document,
    kb: &KnowledgeBase,
    lists: &ReferenceLists,
    cfg: &LinkerConfig,
) -> Vec<LinkResult> {
    let tokens = kb.normalizer.tokenize(&doc.text);
    let doc_terms = document_terms(&tokens, lists);
    let filtered: Vec<Filtered> = doc
        .mentions
        .iter()
        .map(|m| filter_with_terms(&generate_candidates(m, kb), m, &doc_terms, kb, lists, cfg.filters))
        .collect();
    let kept: Vec<BTreeSet<String>> = filtered.iter().map(|f| f.kept.clone()).collect();
    doc.mentions
        .iter()
        .enumerate()
        .map(|(i, m)| select(i, m, &tokens, kb, lists, cfg, &filtered, &kept))
        .collect()
}

/// Prediction record for a linked document.
pub fn to_prediction(doc: &Document, results: &[LinkResult]) -> PredictedDocument {
    let mentions = doc
        .mentions
        .iter()
        .zip(results)
        .map(|(m, r)| PredictedMention {
            start: m.start,
            end: m.end,
            surface: m.surface.clone(),
            ner_type: m.ner_type,
            pos_tag: m.pos_tag,
            prediction: r.decision.clone(),
            score: r.score,
            ambiguity: r
                .ambiguity_list
                .iter()
                .map(|c| AmbiguityEntry { id: c.entity_id.clone(), score: c.combined })
                .collect(),
        })
        .collect();
    PredictedDocument { id: doc.id.clone(), category: doc.category.clone(), text: doc.text.clone(), mentions }
}

/// Exact gazetteer spotting: greedy longest match of token n-grams against
/// the alias index.
pub fn spot_mentions(text: &str, kb: &KnowledgeBase) -> Vec<Mention> {
    let tokens = kb.normalizer.tokenize(text);
    let max = kb.max_alias_tokens();
    let mut mentions = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let longest = (1..=max.min(tokens.len() - i)).rev().find(|&n| {
            let key: Vec<&str> = tokens[i..i + n].iter().map(|t| t.text.as_str()).collect();
            kb.alias_index.contains_key(&key.join(" "))
        });
        match longest {
            Some(n) => {
                let (start, end) = (tokens[i].start, tokens[i + n - 1].end);
                let surface = char_slice(text, start, end).unwrap_or_default();
                mentions.push(Mention::new(start, end, surface));
                i += n;
            }
            None => i += 1,
        }
    }
    mentions
}
