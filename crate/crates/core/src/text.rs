//! Text normalization, tokenization with character offsets, and stopword
//! filtering.
//!
//! The default [`Normalizer::Persian`] profile folds the Arabic code points
//! that commonly leak into Persian text (kaf, yeh) onto their Persian forms,
//! strips tatweel and harakat, deletes the zero-width non-joiner, collapses
//! whitespace and case-folds everything else.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

pub const ARABIC_KAF: char = '\u{0643}';
pub const PERSIAN_KAF: char = '\u{06A9}';
pub const ARABIC_YEH: char = '\u{064A}';
pub const PERSIAN_YEH: char = '\u{06CC}';
pub const TATWEEL: char = '\u{0640}';
pub const ZWNJ: char = '\u{200C}';
const ZWJ: char = '\u{200D}';

/// Normalization profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalizer {
    #[default]
    Persian,
    /// Leaves strings untouched.
    Identity,
}

impl Normalizer {
    pub fn normalize(self, s: &str) -> String {
        match self {
            Normalizer::Persian => normalize_persian(s),
            Normalizer::Identity => s.to_owned(),
        }
    }

    pub fn tokenize(self, s: &str) -> Vec<Token> {
        tokenize_with(self, s)
    }
}

impl fmt::Display for Normalizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalizer::Persian => "persian",
            Normalizer::Identity => "identity",
        })
    }
}

impl FromStr for Normalizer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "persian" => Ok(Normalizer::Persian),
            "identity" => Ok(Normalizer::Identity),
            other => Err(format!("unknown normalizer `{other}` (expected persian or identity)")),
        }
    }
}

/// Normalizes with the default (Persian) profile.
pub fn normalize(s: &str) -> String {
    normalize_persian(s)
}

/// Tokenizes with the default (Persian) profile.
pub fn tokenize(s: &str) -> Vec<Token> {
    tokenize_with(Normalizer::Persian, s)
}

fn is_arabic_diacritic(c: char) -> bool {
    ('\u{064B}'..='\u{0652}').contains(&c)
}

fn is_arabic_script(c: char) -> bool {
    matches!(c,
        '\u{0600}'..='\u{06FF}'
        | '\u{0750}'..='\u{077F}'
        | '\u{08A0}'..='\u{08FF}'
        | '\u{FB50}'..='\u{FDFF}'
        | '\u{FE70}'..='\u{FEFF}')
}

fn normalize_persian(s: &str) -> String {
    let mut folded = String::with_capacity(s.len());
    let mut pending_space = false;
    for c in s.nfc() {
        let c = match c {
            ARABIC_KAF => PERSIAN_KAF,
            ARABIC_YEH => PERSIAN_YEH,
            c => c,
        };
        if c == TATWEEL || c == ZWNJ || is_arabic_diacritic(c) {
            continue;
        }
        if c.is_whitespace() {
            pending_space = !folded.is_empty();
            continue;
        }
        if pending_space {
            folded.push(' ');
            pending_space = false;
        }
        if is_arabic_script(c) {
            folded.push(c);
        } else {
            folded.extend(c.to_lowercase());
        }
    }
    // Deleting marks and lowercasing can leave sequences that compose further.
    let out: String = folded.nfc().collect();
    if out == folded {
        out
    } else {
        normalize_persian(&out)
    }
}

/// A normalized token with char offsets (exclusive end) into the source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Characters that belong inside a word. Everything else (whitespace,
/// punctuation, symbols) separates tokens.
fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
        || c == ZWNJ
        || c == ZWJ
        || c == TATWEEL
        || matches!(c,
            '\u{0300}'..='\u{036F}'
            | '\u{0610}'..='\u{061A}'
            | '\u{064B}'..='\u{065F}'
            | '\u{0670}'
            | '\u{06D6}'..='\u{06ED}')
}

pub fn tokenize_with(normalizer: Normalizer, s: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut start = 0;
    let flush = |raw: &mut String, start: usize, end: usize, tokens: &mut Vec<Token>| {
        if raw.is_empty() {
            return;
        }
        let text = normalizer.normalize(raw);
        raw.clear();
        // A run of joiners or tatweel alone normalizes away.
        if !text.is_empty() {
            tokens.push(Token { text, start, end });
        }
    };
    let mut len = 0;
    for (i, c) in s.chars().enumerate() {
        len = i + 1;
        if is_word_char(c) {
            if current.is_empty() {
                start = i;
            }
            current.push(c);
        } else {
            flush(&mut current, start, i, &mut tokens);
        }
    }
    flush(&mut current, start, len, &mut tokens);
    tokens
}

/// Token texts with stopwords removed, order and duplicates preserved.
pub fn content_terms<'a>(tokens: &'a [Token], stopwords: &BTreeSet<String>) -> Vec<&'a str> {
    tokens
        .iter()
        .map(|t| t.text.as_str())
        .filter(|t| !stopwords.contains(*t))
        .collect()
}

/// Slice `s` by char offsets.
pub fn char_slice(s: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let mut indices = s.char_indices().map(|(i, _)| i).chain(std::iter::once(s.len()));
    let from = indices.nth(start)?;
    let to = if end == start {
        from
    } else {
        indices.nth(end - start - 1)?
    };
    Some(&s[from..to])
}
