//! Rule-based rhyme detection over syllable sequences.
//!
//! Two spans rhyme when both end on a word-final syllable, lie on lines at
//! most `window_lines - 1` apart, have matching vowel nuclei in order (stress
//! ignored, unstressed reduced vowels interchangeable), start on a stressed
//! syllable on both sides, and end in compatible codas. For every pair of
//! word-final syllables the longest such span (up to `max_span`) is taken.
//! Rhyme density is the share of syllables covered by at least one span.

use serde::{Deserialize, Serialize};

use super::dict::{pronounce, PronouncingDictionary, Syllable};
use super::entropy::{entropy_bits, weight_from_entropy, EntropyNormalization};
use crate::corpus::Verse;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodaMatch {
    Exact,
    /// Same length, each consonant pair from the same class.
    Classes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RhymeParams {
    /// Spans may pair within this many consecutive lines.
    pub window_lines: usize,
    pub min_span: usize,
    pub max_span: usize,
    pub coda_match: CodaMatch,
    pub coda_classes: Vec<Vec<String>>,
    /// Vowels treated as one when unstressed (schwa-like reductions).
    pub reduced_vowels: Vec<String>,
    pub entropy: EntropyNormalization,
}

impl Default for RhymeParams {
    fn default() -> Self {
        let class = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        RhymeParams {
            window_lines: 2,
            min_span: 1,
            max_span: 4,
            coda_match: CodaMatch::Classes,
            coda_classes: vec![
                class(&["P", "T", "K", "B", "D", "G"]),
                class(&["F", "V", "TH", "DH", "S", "Z", "SH", "ZH"]),
                class(&["CH", "JH"]),
                class(&["M", "N", "NG"]),
                class(&["L", "R"]),
            ],
            reduced_vowels: class(&["AH", "IH"]),
            entropy: EntropyNormalization::LogTokens,
        }
    }
}

impl RhymeParams {
    fn class_of(&self, phone: &str) -> Option<usize> {
        self.coda_classes
            .iter()
            .position(|c| c.iter().any(|p| p == phone))
    }

    fn codas_compatible(&self, a: &[String], b: &[String]) -> bool {
        if a == b {
            return true;
        }
        if self.coda_match == CodaMatch::Exact || a.len() != b.len() {
            return false;
        }
        a.iter().zip(b).all(|(x, y)| {
            x == y || matches!((self.class_of(x), self.class_of(y)), (Some(i), Some(j)) if i == j)
        })
    }

    fn nuclei_match(&self, a: &Syllable, b: &Syllable) -> bool {
        if a.nucleus == b.nucleus {
            return true;
        }
        let reduced = |s: &Syllable| s.stress == 0 && self.reduced_vowels.contains(&s.nucleus);
        reduced(a) && reduced(b)
    }
}

/// A syllable together with where it sits in the verse.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacedSyllable {
    pub line: usize,
    /// Token index within its line.
    pub token: usize,
    /// Syllable index within its token.
    pub index: usize,
    pub word_final: bool,
    pub syllable: Syllable,
}

/// Two rhyming spans given by the global index of their first syllables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhymePair {
    pub first: usize,
    pub second: usize,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhymeAnalysis {
    pub total_syllables: usize,
    pub rhymed_syllables: usize,
    pub rhyme_pairs: Vec<RhymePair>,
    /// Token entropy in bits.
    pub entropy_bits: f64,
    pub entropy_weight: f64,
    pub density: f64,
    pub weighted_density: f64,
    pub syllables: Vec<PlacedSyllable>,
    /// Per-syllable rhymed flag, parallel to `syllables`.
    pub rhymed: Vec<bool>,
}

pub fn syllables_of(verse: &Verse, dict: &PronouncingDictionary) -> Vec<PlacedSyllable> {
    let mut out = Vec::new();
    for (li, line) in verse.lines.iter().enumerate() {
        for (ti, token) in line.iter().enumerate() {
            let Some(p) = pronounce(token, dict) else {
                continue;
            };
            let n = p.syllables.len();
            out.extend(
                p.syllables
                    .into_iter()
                    .enumerate()
                    .map(|(si, syllable)| PlacedSyllable {
                        line: li,
                        token: ti,
                        index: si,
                        word_final: si + 1 == n,
                        syllable,
                    }),
            );
        }
    }
    out
}

fn span_length(sylls: &[PlacedSyllable], i: usize, j: usize, params: &RhymeParams) -> Option<usize> {
    let (a, b) = (&sylls[i], &sylls[j]);
    if !params.codas_compatible(&a.syllable.coda, &b.syllable.coda) {
        return None;
    }
    let mut best = None;
    for len in 1..=params.max_span {
        if len > i + 1 || j + 1 - len <= i {
            break;
        }
        let (x, y) = (&sylls[i + 1 - len], &sylls[j + 1 - len]);
        if x.line != a.line || y.line != b.line || !params.nuclei_match(&x.syllable, &y.syllable) {
            break;
        }
        if len >= params.min_span && x.syllable.stress > 0 && y.syllable.stress > 0 {
            best = Some(len);
        }
    }
    best
}

pub fn detect_rhymes(
    verse: &Verse,
    dict: &PronouncingDictionary,
    params: &RhymeParams,
) -> Result<RhymeAnalysis> {
    let syllables = syllables_of(verse, dict);
    if syllables.is_empty() {
        return Err(Error::Unpronounceable {
            verse_id: verse.verse_id.clone(),
        });
    }
    let mut rhymed = vec![false; syllables.len()];
    let mut pairs = Vec::new();
    let window = params.window_lines.max(1);
    for i in 0..syllables.len() {
        if !syllables[i].word_final {
            continue;
        }
        for j in i + 1..syllables.len() {
            if syllables[j].line - syllables[i].line >= window {
                break;
            }
            if !syllables[j].word_final {
                continue;
            }
            if let Some(len) = span_length(&syllables, i, j, params) {
                for k in 0..len {
                    rhymed[i - k] = true;
                    rhymed[j - k] = true;
                }
                pairs.push(RhymePair {
                    first: i + 1 - len,
                    second: j + 1 - len,
                    length: len,
                });
            }
        }
    }
    let total = syllables.len();
    let count = rhymed.iter().filter(|r| **r).count();
    let density = count as f64 / total as f64;
    let (h, n) = entropy_bits(verse.tokens());
    let weight = weight_from_entropy(h, n, params.entropy);
    Ok(RhymeAnalysis {
        total_syllables: total,
        rhymed_syllables: count,
        rhyme_pairs: pairs,
        entropy_bits: h,
        entropy_weight: weight,
        density,
        weighted_density: density * weight,
        syllables,
        rhymed,
    })
}

/// Rhyme density scaled by the verse's token-entropy weight.
pub fn weighted_rhyme_density(
    verse: &Verse,
    dict: &PronouncingDictionary,
    params: &RhymeParams,
) -> Result<f64> {
    Ok(detect_rhymes(verse, dict, params)?.weighted_density)
}
