//! Precision / recall / F1 scoring of predictions against gold annotations.
//!
//! Per mention: a correct link is a true positive; a wrong link counts as
//! both a false positive and a false negative; a missed gold entity (NIL
//! predicted) is a false negative; a link where gold says NIL is a false
//! positive. NIL/NIL pairs and mentions without gold are not counted.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Document, Gold, PredictedDocument};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("alignment error: {0}")]
    Alignment(String),
    #[error("{name} = {value} lies outside [0, 1]")]
    Domain { name: &'static str, value: f64 },
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1(precision: f64, recall: f64) -> Result<f64, EvalError> {
    for (name, value) in [("precision", precision), ("recall", recall)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(EvalError::Domain { name, value });
        }
    }
    Ok(f1_unchecked(precision, recall))
}

fn f1_unchecked(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Metrics {
    pub fn from_counts(tp: u64, fp: u64, fn_: u64) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        Metrics { tp, fp, fn_, precision, recall, f1: f1_unchecked(precision, recall) }
    }

    fn add(&self, other: &Metrics) -> Metrics {
        Metrics::from_counts(self.tp + other.tp, self.fp + other.fp, self.fn_ + other.fn_)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_category: BTreeMap<String, Metrics>,
    /// Micro-average over all categories.
    pub total: Metrics,
}

impl EvalReport {
    /// Aligned text table: Category, P, R, F1, with a closing Total row.
    pub fn render_table(&self) -> String {
        let width = self
            .per_category
            .keys()
            .map(|k| k.chars().count())
            .chain([8])
            .max()
            .unwrap_or(8);
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  {:>6}  {:>6}  {:>6}", "Category", "P", "R", "F1");
        let rows = self.per_category.iter().map(|(k, m)| (k.as_str(), m));
        for (name, m) in rows.chain([("Total", &self.total)]) {
            let pad = width - name.chars().count();
            let _ = writeln!(
                out,
                "{name}{:pad$}  {:.4}  {:.4}  {:.4}",
                "", m.precision, m.recall, m.f1
            );
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Tp,
    Fp,
    Fn,
    Wrong,
    Ignored,
}

fn outcome(gold: &Gold, predicted: &Gold) -> Outcome {
    match (gold, predicted) {
        (Gold::Entity(g), Gold::Entity(p)) if g == p => Outcome::Tp,
        (Gold::Entity(_), Gold::Entity(_)) => Outcome::Wrong,
        (Gold::Entity(_), Gold::Nil) => Outcome::Fn,
        (Gold::Nil, Gold::Entity(_)) => Outcome::Fp,
        (Gold::Nil, Gold::Nil) => Outcome::Ignored,
    }
}

/// Aligns predictions with gold by (document id, mention index).
pub fn score_predictions(
    gold: &[Document],
    predictions: &[PredictedDocument],
) -> Result<EvalReport, EvalError> {
    let by_id: BTreeMap<&str, &PredictedDocument> =
        predictions.iter().map(|p| (p.id.as_str(), p)).collect();
    if by_id.len() != predictions.len() {
        return Err(EvalError::Alignment("duplicate document id in predictions".into()));
    }
    if predictions.len() != gold.len() {
        return Err(EvalError::Alignment(format!(
            "{} gold documents but {} predicted documents",
            gold.len(),
            predictions.len()
        )));
    }

    let mut counts: BTreeMap<&str, (u64, u64, u64)> = BTreeMap::new();
    for doc in gold {
        let pred = by_id.get(doc.id.as_str()).ok_or_else(|| {
            EvalError::Alignment(format!("document `{}` has no prediction", doc.id))
        })?;
        if pred.mentions.len() != doc.mentions.len() {
            return Err(EvalError::Alignment(format!(
                "document `{}`: {} gold mentions but {} predictions",
                doc.id,
                doc.mentions.len(),
                pred.mentions.len()
            )));
        }
        let c = counts.entry(doc.category.as_str()).or_default();
        for (g, p) in doc.mentions.iter().zip(&pred.mentions) {
            let Some(gold) = &g.gold else { continue };
            match outcome(gold, &p.prediction) {
                Outcome::Tp => c.0 += 1,
                Outcome::Fp => c.1 += 1,
                Outcome::Fn => c.2 += 1,
                Outcome::Wrong => {
                    c.1 += 1;
                    c.2 += 1;
                }
                Outcome::Ignored => {}
            }
        }
    }

    let per_category: BTreeMap<String, Metrics> = counts
        .into_iter()
        .map(|(k, (tp, fp, fn_))| (k.to_owned(), Metrics::from_counts(tp, fp, fn_)))
        .collect();
    let total = per_category.values().fold(Metrics::default(), |acc, m| acc.add(m));
    Ok(EvalReport { per_category, total })
}
