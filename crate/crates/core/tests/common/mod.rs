#![allow(dead_code)]

use std::path::PathBuf;

use kblink::corpus::{load_corpus, Document};
use kblink::kb::load_kb;
use kblink::{KnowledgeBase, Normalizer, ReferenceLists};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn mini_kb() -> (KnowledgeBase, ReferenceLists) {
    load_kb(&fixture("mini_kb.jsonl"), &fixture("mini_lists.json"), Normalizer::Persian).unwrap()
}

pub fn mini_corpus() -> Vec<Document> {
    load_corpus(&fixture("mini_corpus.jsonl")).unwrap()
}

/// Raw dump lines as untyped JSON, for oracles that must not go through the loader.
pub fn raw_dump() -> Vec<serde_json::Value> {
    std::fs::read_to_string(fixture("mini_kb.jsonl"))
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

pub fn strs(v: &serde_json::Value) -> Vec<String> {
    v.as_array()
        .map(|a| a.iter().map(|x| x.as_str().unwrap().to_owned()).collect())
        .unwrap_or_default()
}
