//! Textual uniqueness: the maximum tf-idf cosine similarity between a verse
//! and every training verse of the target artist.
//!
//! Weights are `f_ij * ln(N / n_j)` where `N` is the number of indexed verses,
//! `n_j` the number of verses containing token `j` and `f_ij` its count in
//! verse `i`. Query vectors reuse the index's idf; tokens unseen at build time
//! weigh nothing.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Verse;
use crate::error::{Error, Result};

/// Token standing for a line break when `include_line_breaks` is set.
pub const LINE_BREAK_TOKEN: &str = "<lb>";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimilarityOptions {
    /// Count line breaks as a token. Off by default.
    pub include_line_breaks: bool,
}

/// Sparse weight vector keyed by token.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerseVector {
    pub weights: BTreeMap<String, f64>,
}

impl VerseVector {
    pub fn norm(&self) -> f64 {
        self.weights.values().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.weights.values().all(|w| *w == 0.0)
    }

    pub fn dot(&self, other: &VerseVector) -> f64 {
        let (small, large) = if self.weights.len() <= other.weights.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .weights
            .iter()
            .filter_map(|(t, w)| large.weights.get(t).map(|v| w * v))
            .sum()
    }

    /// Cosine similarity; zero when either side is the zero vector.
    pub fn cosine(&self, other: &VerseVector) -> f64 {
        let denom = self.norm() * other.norm();
        if denom == 0.0 {
            return 0.0;
        }
        self.dot(other) / denom
    }
}

fn term_counts(verse: &Verse, opts: SimilarityOptions) -> BTreeMap<String, u32> {
    let mut counts = BTreeMap::new();
    for t in verse.tokens() {
        *counts.entry(t.to_string()).or_insert(0) += 1;
    }
    if opts.include_line_breaks && verse.lines.len() > 1 {
        *counts.entry(LINE_BREAK_TOKEN.to_string()).or_insert(0) += verse.lines.len() as u32 - 1;
    }
    counts
}

#[derive(Debug, Clone)]
pub struct TfIdfIndex {
    verse_ids: Vec<String>,
    doc_freq: BTreeMap<String, u32>,
    term_freq: Vec<BTreeMap<String, u32>>,
    vectors: Vec<VerseVector>,
    weight_norms: Vec<f64>,
    options: SimilarityOptions,
}

/// Result of a max-similarity query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScore {
    pub value: f64,
    /// Index of the most similar training verse, absent for degenerate queries.
    pub best_match: Option<usize>,
    /// The candidate vector was all zero (every token unknown or idf-zero).
    pub degenerate: bool,
}

impl TfIdfIndex {
    pub fn build(training: &[Verse]) -> Result<Self> {
        Self::build_with(training, SimilarityOptions::default())
    }

    pub fn build_with(training: &[Verse], options: SimilarityOptions) -> Result<Self> {
        if training.is_empty() {
            return Err(Error::EmptyTraining);
        }
        let term_freq: Vec<_> = training.iter().map(|v| term_counts(v, options)).collect();
        let mut doc_freq = BTreeMap::new();
        for counts in &term_freq {
            for token in counts.keys() {
                *doc_freq.entry(token.clone()).or_insert(0) += 1;
            }
        }
        let mut index = TfIdfIndex {
            verse_ids: training.iter().map(|v| v.verse_id.clone()).collect(),
            doc_freq,
            term_freq,
            vectors: Vec::new(),
            weight_norms: Vec::new(),
            options,
        };
        index.vectors = index.term_freq.iter().map(|c| index.weigh(c)).collect();
        index.weight_norms = index.vectors.iter().map(VerseVector::norm).collect();
        Ok(index)
    }

    /// N: number of indexed verses.
    pub fn len(&self) -> usize {
        self.term_freq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.term_freq.is_empty()
    }

    pub fn doc_freq(&self, token: &str) -> u32 {
        self.doc_freq.get(token).copied().unwrap_or(0)
    }

    pub fn term_freq(&self, verse: usize) -> &BTreeMap<String, u32> {
        &self.term_freq[verse]
    }

    pub fn weight_norms(&self) -> &[f64] {
        &self.weight_norms
    }

    pub fn verse_id(&self, i: usize) -> &str {
        &self.verse_ids[i]
    }

    pub fn vector(&self, i: usize) -> &VerseVector {
        &self.vectors[i]
    }

    /// `ln(N / n_j)`, or `None` for tokens outside the index.
    pub fn idf(&self, token: &str) -> Option<f64> {
        self.doc_freq
            .get(token)
            .map(|&n| (self.len() as f64 / n as f64).ln())
    }

    fn weigh(&self, counts: &BTreeMap<String, u32>) -> VerseVector {
        let weights = counts
            .iter()
            .filter_map(|(t, &f)| self.idf(t).map(|idf| (t.clone(), f as f64 * idf)))
            .collect();
        VerseVector { weights }
    }

    pub fn vectorize(&self, verse: &Verse) -> VerseVector {
        self.weigh(&term_counts(verse, self.options))
    }

    pub fn max_similarity(&self, candidate: &Verse) -> SimilarityScore {
        let query = self.vectorize(candidate);
        let qnorm = query.norm();
        if qnorm == 0.0 {
            return SimilarityScore {
                value: 0.0,
                best_match: None,
                degenerate: true,
            };
        }
        let mut best = (0.0, None);
        for (i, (vec, &norm)) in self.vectors.iter().zip(&self.weight_norms).enumerate() {
            if norm == 0.0 {
                continue;
            }
            let cos = query.dot(vec) / (qnorm * norm);
            if best.1.is_none() || cos > best.0 {
                best = (cos, Some(i));
            }
        }
        SimilarityScore {
            value: best.0.clamp(0.0, 1.0),
            best_match: best.1,
            degenerate: false,
        }
    }

    /// Cosine against every training verse, in index order.
    pub fn similarities(&self, candidate: &Verse) -> Vec<f64> {
        let query = self.vectorize(candidate);
        self.vectors.iter().map(|v| query.cosine(v)).collect()
    }
}
