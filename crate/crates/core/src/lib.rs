//! Knowledge-base agnostic entity linking.
//!
//! The pipeline takes annotated mentions, generates candidates from the
//! knowledge base's variant labels, prunes them with type / POS / popularity
//! heuristics, scores the survivors with a TF-IDF context score and a link
//! graph coherence score, and either links the best candidate or abstains
//! (NIL) when its score falls below a threshold.

pub mod corpus;
pub mod eval;
pub mod index;
pub mod kb;
pub mod linker;
pub mod text;

pub use corpus::{CorpusStats, Document, Gold, Mention, PredictedDocument, PredictedMention};
pub use eval::{f1, score_predictions, EvalReport, Metrics};
pub use kb::{EntityRecord, KbError, KnowledgeBase, NerType, PosCategory, ReferenceLists};
pub use linker::{link_document, Decision, LinkResult, LinkerConfig, ScoredCandidate};
pub use text::{normalize, tokenize, Normalizer, Token};
