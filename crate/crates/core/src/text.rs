//! Text normalization, tokenization, n-gram generation and vocabulary
//! construction.
//!
//! The same pipeline is used everywhere text is turned into features:
//! `normalize` → `tokenize` → `remove_stopwords` → `ngrams`, so corpus
//! statistics, training and single-document prediction all agree on what a
//! token is.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default English stopword list, one term per line.
pub const DEFAULT_STOPWORDS: &str = include_str!("../assets/stopwords_en.txt");

#[derive(Debug, Error)]
pub enum TextError {
    #[error("cannot build a vocabulary from an empty corpus")]
    EmptyCorpus,
    #[error("invalid n-gram range {min}..={max}; require 1 <= min <= max <= 3")]
    BadNgramRange { min: usize, max: usize },
}

/// N-gram extraction and vocabulary limits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NgramConfig {
    /// Smallest n-gram size, inclusive.
    pub min_n: usize,
    /// Largest n-gram size, inclusive.
    pub max_n: usize,
    /// Document-frequency floor; terms seen in fewer documents are dropped.
    pub min_df: u32,
    /// Optional cap on vocabulary size, keeping the most document-frequent
    /// terms (ties broken lexicographically).
    pub max_vocab: Option<usize>,
}

impl Default for NgramConfig {
    fn default() -> Self {
        NgramConfig {
            min_n: 1,
            max_n: 2,
            min_df: 1,
            max_vocab: None,
        }
    }
}

impl NgramConfig {
    pub fn validate(&self) -> Result<(), TextError> {
        if self.min_n < 1 || self.min_n > self.max_n || self.max_n > 3 {
            return Err(TextError::BadNgramRange {
                min: self.min_n,
                max: self.max_n,
            });
        }
        Ok(())
    }
}

/// Lowercase, strip punctuation and markup leftovers, drop standalone
/// numbers, collapse whitespace. Idempotent.
pub fn normalize(text: &str) -> String {
    let mut cleaned = String::with_capacity(text.len());
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            for lower in ch.to_lowercase() {
                // Lowercasing can expand to sequences containing combining
                // marks; those are not alphanumeric and must not survive or
                // a second pass would split the token differently.
                if lower.is_alphanumeric() {
                    cleaned.push(lower);
                }
            }
        } else {
            cleaned.push(' ');
        }
    }
    let mut out = String::with_capacity(cleaned.len());
    for token in cleaned.split_whitespace() {
        if token.chars().all(|c| c.is_numeric()) {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(token);
    }
    out
}

/// Split on whitespace. Produces no empty tokens.
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

/// Order-preserving removal of stoplist members.
pub fn remove_stopwords<'a>(tokens: &[&'a str], stoplist: &HashSet<String>) -> Vec<&'a str> {
    tokens
        .iter()
        .copied()
        .filter(|t| !stoplist.contains(*t))
        .collect()
}

/// Parse a stopword file (one term per line) into a normalized set.
///
/// Lines are run through [`normalize`]; a line that normalizes to several
/// tokens contributes each of them.
pub fn parse_stoplist(contents: &str) -> HashSet<String> {
    let mut set = HashSet::new();
    for line in contents.lines() {
        let norm = normalize(line);
        for tok in norm.split_whitespace() {
            set.insert(tok.to_string());
        }
    }
    set
}

/// The stoplist shipped with the crate.
pub fn default_stoplist() -> HashSet<String> {
    parse_stoplist(DEFAULT_STOPWORDS)
}

/// Contiguous n-grams joined by single spaces, for each n in
/// `min_n..=max_n`, in positional order.
pub fn ngrams(tokens: &[&str], config: &NgramConfig) -> Vec<String> {
    let mut out = Vec::new();
    for n in config.min_n..=config.max_n {
        if n == 0 || tokens.len() < n {
            continue;
        }
        for window in tokens.windows(n) {
            out.push(window.join(" "));
        }
    }
    out
}

/// Full text-to-features pass: normalize, tokenize, drop stopwords, n-gram.
pub fn extract_features(text: &str, stoplist: &HashSet<String>, config: &NgramConfig) -> Vec<String> {
    let norm = normalize(text);
    let tokens = tokenize(&norm);
    let kept = remove_stopwords(&tokens, stoplist);
    ngrams(&kept, config)
}

/// Term-to-index map with document frequencies.
///
/// Indices are dense (`0..len()`), assigned in sorted-term order so the same
/// corpus always produces the same vocabulary regardless of iteration order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "VocabularyData", into = "VocabularyData")]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_frequency: Vec<u32>,
    n_docs: usize,
    #[serde(skip)]
    index: HashMap<String, u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VocabularyData {
    terms: Vec<String>,
    doc_frequency: Vec<u32>,
    n_docs: usize,
}

impl From<VocabularyData> for Vocabulary {
    fn from(d: VocabularyData) -> Self {
        Vocabulary::from_parts(d.terms, d.doc_frequency, d.n_docs)
    }
}

impl From<Vocabulary> for VocabularyData {
    fn from(v: Vocabulary) -> Self {
        VocabularyData {
            terms: v.terms,
            doc_frequency: v.doc_frequency,
            n_docs: v.n_docs,
        }
    }
}

impl Vocabulary {
    fn from_parts(terms: Vec<String>, doc_frequency: Vec<u32>, n_docs: usize) -> Self {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Vocabulary {
            terms,
            doc_frequency,
            n_docs,
            index,
        }
    }

    /// Number of terms (the feature dimension V).
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of documents the vocabulary was built from.
    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn index_of(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: u32) -> &str {
        &self.terms[index as usize]
    }

    pub fn doc_frequency(&self, index: u32) -> u32 {
        self.doc_frequency[index as usize]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }
}

/// Build a vocabulary over per-document n-gram sequences.
///
/// Terms appearing in at least `min_df` documents are kept; if `max_vocab`
/// is set the most document-frequent terms survive (ties broken
/// lexicographically). Empty documents contribute no terms but still count
/// toward `n_docs`.
pub fn build_vocabulary(documents: &[Vec<String>], config: &NgramConfig) -> Result<Vocabulary, TextError> {
    if documents.is_empty() {
        return Err(TextError::EmptyCorpus);
    }
    let mut df: HashMap<&str, u32> = HashMap::new();
    let mut seen: HashSet<&str> = HashSet::new();
    for doc in documents {
        seen.clear();
        for term in doc {
            if seen.insert(term.as_str()) {
                *df.entry(term.as_str()).or_insert(0) += 1;
            }
        }
    }
    let mut entries: Vec<(&str, u32)> = df
        .into_iter()
        .filter(|&(_, f)| f >= config.min_df)
        .collect();
    if let Some(cap) = config.max_vocab {
        if entries.len() > cap {
            entries.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            entries.truncate(cap);
        }
    }
    entries.sort_unstable_by(|a, b| a.0.cmp(b.0));
    let terms: Vec<String> = entries.iter().map(|&(t, _)| t.to_string()).collect();
    let doc_frequency: Vec<u32> = entries.iter().map(|&(_, f)| f).collect();
    Ok(Vocabulary::from_parts(terms, doc_frequency, documents.len()))
}
