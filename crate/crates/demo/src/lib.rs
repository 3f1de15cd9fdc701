//! Browser demo: rhyme highlighting, max similarity against pasted training
//! verses, and the regression merge of a checkpoint series. Every export
//! takes strings and returns JSON; failures surface as JS exceptions.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use ghosteval::corpus::{Provenance, Verse};
use ghosteval::evalmerge::merged_similarity;
use ghosteval::generator::CheckpointPoint;
use ghosteval::rhyme::{detect_rhymes, PronouncingDictionary, RhymeParams};
use ghosteval::similarity::TfIdfIndex;
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn dict() -> &'static PronouncingDictionary {
    static DICT: OnceLock<PronouncingDictionary> = OnceLock::new();
    DICT.get_or_init(PronouncingDictionary::bundled)
}

fn verse(id: &str, text: &str) -> Result<Verse, String> {
    Verse::from_text("demo", id, text, Provenance::Generated { checkpoint: 0 }).ok_or_else(|| "verse is empty".to_string())
}

/// Blank-line separated blocks.
fn verses(text: &str) -> Result<Vec<Verse>, String> {
    text.split("\n\n")
        .map(|b| b.trim_matches('\n'))
        .filter(|b| !b.trim().is_empty())
        .enumerate()
        .map(|(i, b)| verse(&format!("v{i}"), b))
        .collect()
}

#[derive(Serialize)]
struct TokenView {
    text: String,
    syllables: usize,
    rhymed: usize,
    /// Rhyme group of the token's first rhymed syllable.
    group: Option<usize>,
}

#[derive(Serialize)]
struct RhymeView {
    density: f64,
    weighted_density: f64,
    entropy_weight: f64,
    total_syllables: usize,
    rhymed_syllables: usize,
    pairs: usize,
    lines: Vec<Vec<TokenView>>,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

pub fn analyze_rhymes_json(text: &str) -> Result<String, String> {
    let v = verse("input", text)?;
    let a = detect_rhymes(&v, dict(), &RhymeParams::default()).map_err(|e| e.to_string())?;

    // syllables linked by any pair share a group
    let mut parent: Vec<usize> = (0..a.syllables.len()).collect();
    for p in &a.rhyme_pairs {
        for k in 0..p.length {
            let (x, y) = (find(&mut parent, p.first + k), find(&mut parent, p.second + k));
            parent[x] = y;
        }
    }
    let mut groups: BTreeMap<usize, usize> = BTreeMap::new();
    let mut lines: Vec<Vec<TokenView>> = v
        .lines
        .iter()
        .map(|l| {
            l.iter()
                .map(|t| TokenView {
                    text: t.clone(),
                    syllables: 0,
                    rhymed: 0,
                    group: None,
                })
                .collect()
        })
        .collect();
    for (i, s) in a.syllables.iter().enumerate() {
        let tok = &mut lines[s.line][s.token];
        tok.syllables += 1;
        if a.rhymed[i] {
            tok.rhymed += 1;
            if tok.group.is_none() {
                let root = find(&mut parent, i);
                let next = groups.len();
                tok.group = Some(*groups.entry(root).or_insert(next));
            }
        }
    }
    let view = RhymeView {
        density: a.density,
        weighted_density: a.weighted_density,
        entropy_weight: a.entropy_weight,
        total_syllables: a.total_syllables,
        rhymed_syllables: a.rhymed_syllables,
        pairs: a.rhyme_pairs.len(),
        lines,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SimilarityView {
    value: f64,
    degenerate: bool,
    best_match: Option<usize>,
    scores: Vec<f64>,
}

pub fn max_similarity_json(training: &str, candidate: &str) -> Result<String, String> {
    let training = verses(training)?;
    let index = TfIdfIndex::build(&training).map_err(|e| e.to_string())?;
    let c = verse("candidate", candidate)?;
    let s = index.max_similarity(&c);
    let view = SimilarityView {
        value: s.value,
        degenerate: s.degenerate,
        best_match: s.best_match,
        scores: index.similarities(&c),
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct MergeView {
    #[serde(flatten)]
    score: ghosteval::evalmerge::MergedScore,
    points: Vec<[f64; 3]>,
}

/// `series` holds one `x, rhyme_density, similarity` row per line; a header
/// row and `#` comments are skipped.
pub fn merge_series_json(series: &str, target: f64) -> Result<String, String> {
    let mut points = Vec::new();
    for (n, line) in series.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Result<Vec<f64>, _> = cells.iter().map(|c| c.parse::<f64>()).collect();
        match parsed {
            Ok(v) if v.len() == 3 => points.push(CheckpointPoint {
                x: v[0],
                avg_rhyme_density: v[1],
                avg_max_similarity: v[2],
                verse_refs: Vec::new(),
            }),
            Err(_) if points.is_empty() && n == 0 => {} // header
            _ => return Err(format!("line {}: expected x, rhyme_density, similarity", n + 1)),
        }
    }
    let score = merged_similarity(&points, target).map_err(|e| e.to_string())?;
    let view = MergeView {
        score,
        points: points.iter().map(|p| [p.x, p.avg_rhyme_density, p.avg_max_similarity]).collect(),
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn analyze_rhymes(text: &str) -> Result<String, JsValue> {
    analyze_rhymes_json(text).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn max_similarity(training: &str, candidate: &str) -> Result<String, JsValue> {
    max_similarity_json(training, candidate).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn merge_series(series: &str, target: f64) -> Result<String, JsValue> {
    merge_series_json(series, target).map_err(|e| JsValue::from_str(&e))
}
