//! Browser bindings over the bundled mini knowledge base.
//!
//! The `demo_*` functions hold the logic and return plain `Result`s so they
//! can be tested natively; the `#[wasm_bindgen]` exports only convert errors.

use std::sync::OnceLock;

use kblink::corpus::parse_corpus;
use kblink::linker::{link_document, spot_mentions, to_prediction};
use kblink::{
    score_predictions, Decision, Document, KnowledgeBase, LinkerConfig, Normalizer, ReferenceLists,
    ScoredCandidate,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const KB_DUMP: &str = include_str!("../../core/tests/fixtures/mini_kb.jsonl");
const LISTS: &str = include_str!("../../core/tests/fixtures/mini_lists.json");
const CORPUS: &str = include_str!("../../core/tests/fixtures/mini_corpus.jsonl");

struct Bundle {
    kb: KnowledgeBase,
    lists: ReferenceLists,
    corpus: Vec<Document>,
}

fn bundle() -> &'static Bundle {
    static BUNDLE: OnceLock<Bundle> = OnceLock::new();
    BUNDLE.get_or_init(|| {
        let lists = ReferenceLists::from_json(LISTS)
            .and_then(|l| l.prepare(Normalizer::Persian))
            .expect("bundled lists");
        let kb = KnowledgeBase::parse_dump(KB_DUMP, &lists, Normalizer::Persian).expect("bundled KB");
        let corpus = parse_corpus(CORPUS).expect("bundled corpus");
        Bundle { kb, lists, corpus }
    })
}

fn config(lambda: f64, tau: f64) -> Result<LinkerConfig, String> {
    let cfg = LinkerConfig { lambda, nil_threshold: tau, ..Default::default() };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct LinkedSpan<'a> {
    start: usize,
    end: usize,
    surface: &'a str,
    prediction: String,
    label: Option<&'a str>,
    score: f64,
    others: &'a [ScoredCandidate],
}

#[derive(Serialize)]
struct SweepPoint {
    tau: f64,
    precision: f64,
    recall: f64,
    f1: f64,
    nil: usize,
}

pub fn demo_normalize(text: &str) -> String {
    Normalizer::Persian.normalize(text)
}

/// Spots alias matches in free text and links them.
pub fn demo_link(text: &str, lambda: f64, tau: f64) -> Result<String, String> {
    let cfg = config(lambda, tau)?;
    let b = bundle();
    let doc = Document {
        id: "input".into(),
        category: String::new(),
        text: text.to_owned(),
        mentions: spot_mentions(text, &b.kb),
    };
    let results = link_document(&doc, &b.kb, &b.lists, &cfg);
    let spans: Vec<LinkedSpan> = doc
        .mentions
        .iter()
        .zip(&results)
        .map(|(m, r)| LinkedSpan {
            start: m.start,
            end: m.end,
            surface: &m.surface,
            prediction: r.decision.to_string(),
            label: match &r.decision {
                Decision::Entity(id) => b.kb.entity(id).map(|e| e.canonical_label.as_str()),
                Decision::Nil => None,
            },
            score: r.score,
            others: &r.ambiguity_list,
        })
        .collect();
    serde_json::to_string(&spans).map_err(|e| e.to_string())
}

/// Micro P/R/F1 over the bundled gold corpus for thresholds 0, 0.05, ..., 1.
pub fn demo_sweep(lambda: f64) -> Result<String, String> {
    let b = bundle();
    let mut points = Vec::new();
    for step in 0..=20 {
        let tau = step as f64 / 20.0;
        let cfg = config(lambda, tau)?;
        let preds: Vec<_> = b
            .corpus
            .iter()
            .map(|d| to_prediction(d, &link_document(d, &b.kb, &b.lists, &cfg)))
            .collect();
        let nil = preds
            .iter()
            .flat_map(|p| &p.mentions)
            .filter(|m| m.prediction == Decision::Nil)
            .count();
        let t = score_predictions(&b.corpus, &preds).map_err(|e| e.to_string())?.total;
        points.push(SweepPoint { tau, precision: t.precision, recall: t.recall, f1: t.f1, nil });
    }
    serde_json::to_string(&points).map_err(|e| e.to_string())
}

pub fn demo_sample() -> String {
    bundle().corpus.first().map(|d| d.text.clone()).unwrap_or_default()
}

#[wasm_bindgen]
pub fn normalize(text: &str) -> String {
    demo_normalize(text)
}

/// JSON array of linked spans.
#[wasm_bindgen]
pub fn link(text: &str, lambda: f64, tau: f64) -> Result<String, JsError> {
    demo_link(text, lambda, tau).map_err(|e| JsError::new(&e))
}

/// JSON array of `{tau, precision, recall, f1, nil}`.
#[wasm_bindgen]
pub fn sweep(lambda: f64) -> Result<String, JsError> {
    demo_sweep(lambda).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn sample_text() -> String {
    demo_sample()
}
