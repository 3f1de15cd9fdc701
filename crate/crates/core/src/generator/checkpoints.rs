use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ngram::{GenerationMode, NGramModel, DEFAULT_MAX_TOKENS, MAX_ORDER};
use crate::corpus::{ArtistCorpus, Provenance, Verse};
use crate::error::{Error, Result};
use crate::rhyme::{detect_rhymes, PronouncingDictionary, RhymeParams};
use crate::similarity::TfIdfIndex;

/// External checkpoints are read every this many iterations.
pub const CHECKPOINT_SPACING: u64 = 2_000;
pub const LAST_CHECKPOINT: u64 = 16_000;
/// Iterations around each checkpoint whose verses are pooled into it.
pub const WINDOW_OFFSETS: [u64; 4] = [100, 200, 300, 400];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointPoint {
    /// Iteration number, or n-gram order for the baseline.
    pub x: f64,
    pub avg_rhyme_density: f64,
    pub avg_max_similarity: f64,
    pub verse_refs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredVerse {
    pub verse_id: String,
    pub weighted_rhyme_density: f64,
    pub max_similarity: f64,
    pub token_count: usize,
}

/// Weighted rhyme density and max similarity of one verse. A verse with no
/// pronounceable syllable has density 0.
pub fn score_verse(
    verse: &Verse,
    index: &TfIdfIndex,
    dict: &PronouncingDictionary,
    params: &RhymeParams,
) -> Result<ScoredVerse> {
    let density = match detect_rhymes(verse, dict, params) {
        Ok(a) => a.weighted_density,
        Err(Error::Unpronounceable { verse_id }) => {
            log::warn!("verse {verse_id} has no pronounceable syllables; density set to 0");
            0.0
        }
        Err(e) => return Err(e),
    };
    Ok(ScoredVerse {
        verse_id: verse.verse_id.clone(),
        weighted_rhyme_density: density,
        max_similarity: index.max_similarity(verse).value,
        token_count: verse.token_count,
    })
}

fn average_point(x: f64, scored: &[ScoredVerse]) -> CheckpointPoint {
    let n = scored.len() as f64;
    CheckpointPoint {
        x,
        avg_rhyme_density: scored.iter().map(|s| s.weighted_rhyme_density).sum::<f64>() / n,
        avg_max_similarity: scored.iter().map(|s| s.max_similarity).sum::<f64>() / n,
        verse_refs: scored.iter().map(|s| s.verse_id.clone()).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineConfig {
    pub seed: u64,
    pub verses_per_point: usize,
    pub max_tokens: usize,
    pub mode: GenerationMode,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            seed: 42,
            verses_per_point: 5,
            max_tokens: DEFAULT_MAX_TOKENS,
            mode: GenerationMode::Sample,
        }
    }
}

/// Seed of the `i`-th verse generated at order `n`.
pub fn verse_seed(base: u64, n: usize, i: usize) -> u64 {
    base.wrapping_mul(1_000_003)
        .wrapping_add((n as u64) * 1_000)
        .wrapping_add(i as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineSuite {
    pub points: Vec<CheckpointPoint>,
    pub verses: Vec<Verse>,
}

/// Generates `verses_per_point` verses for every n in 1..=9 and averages
/// their scores into one point per n.
pub fn baseline_checkpoint_suite(
    corpus: &ArtistCorpus,
    index: &TfIdfIndex,
    dict: &PronouncingDictionary,
    params: &RhymeParams,
    config: &BaselineConfig,
) -> Result<BaselineSuite> {
    let mut points = Vec::with_capacity(MAX_ORDER);
    let mut verses = Vec::new();
    for n in 1..=MAX_ORDER {
        let model = NGramModel::train(&corpus.verses, n)?;
        let mut scored = Vec::with_capacity(config.verses_per_point);
        for i in 0..config.verses_per_point {
            let verse = model.generate_verse(
                &corpus.artist_id,
                &format!("{}/baseline-n{n}-{i}", corpus.artist_id),
                n as u64,
                verse_seed(config.seed, n, i),
                config.max_tokens,
                config.mode,
            )?;
            scored.push(score_verse(&verse, index, dict, params)?);
            verses.push(verse);
        }
        points.push(average_point(n as f64, &scored));
    }
    Ok(BaselineSuite { points, verses })
}

/// Parses `iter_<k>.txt`.
pub fn parse_checkpoint_name(name: &str) -> Option<u64> {
    name.strip_prefix("iter_")?.strip_suffix(".txt")?.parse().ok()
}

/// The checkpoint whose window holds `iteration`, if any.
pub fn window_of(iteration: u64) -> Option<u64> {
    let nearest = ((iteration + CHECKPOINT_SPACING / 2) / CHECKPOINT_SPACING) * CHECKPOINT_SPACING;
    if nearest > LAST_CHECKPOINT {
        return None;
    }
    let offset = iteration.abs_diff(nearest);
    (offset == 0 || WINDOW_OFFSETS.contains(&offset)).then_some(nearest)
}

/// Reads every `iter_<k>.txt` in `dir`. Lines are split on whitespace only.
pub fn load_checkpoint_verses(dir: &Path, artist_id: &str) -> Result<Vec<Verse>> {
    let mut found = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if !name.ends_with(".txt") {
            continue;
        }
        let iteration =
            parse_checkpoint_name(&name).ok_or_else(|| Error::CheckpointName(name.clone()))?;
        found.push((iteration, entry.path()));
    }
    found.sort();
    let mut verses = Vec::with_capacity(found.len());
    for (iteration, path) in found {
        let raw = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let text = std::str::from_utf8(&raw)?;
        let lines = text
            .lines()
            .map(|l| l.split_whitespace().map(str::to_string).collect())
            .collect();
        match Verse::new(
            artist_id,
            format!("{artist_id}/iter_{iteration}"),
            lines,
            Provenance::Generated {
                checkpoint: iteration,
            },
        ) {
            Some(v) => verses.push(v),
            None => log::warn!("{} is empty; skipped", path.display()),
        }
    }
    Ok(verses)
}

/// Nine points at 0, 2000, ..., 16000, each averaging the verses in its window.
pub fn external_checkpoint_suite(
    verses: &[Verse],
    index: &TfIdfIndex,
    dict: &PronouncingDictionary,
    params: &RhymeParams,
) -> Result<Vec<CheckpointPoint>> {
    let mut windows: BTreeMap<u64, Vec<&Verse>> = BTreeMap::new();
    for v in verses {
        let Provenance::Generated { checkpoint } = v.provenance else {
            continue;
        };
        if let Some(x) = window_of(checkpoint) {
            windows.entry(x).or_default().push(v);
        }
    }
    let mut points = Vec::new();
    for x in (0..=LAST_CHECKPOINT).step_by(CHECKPOINT_SPACING as usize) {
        let members = windows.get(&x).ok_or(Error::MissingCheckpoint { x })?;
        if members.len() == 1 {
            log::warn!("checkpoint {x} averages a single verse");
        }
        let scored = members
            .iter()
            .map(|v| score_verse(v, index, dict, params))
            .collect::<Result<Vec<_>>>()?;
        points.push(average_point(x as f64, &scored));
    }
    Ok(points)
}

pub fn load_external_checkpoints(
    dir: &Path,
    artist_id: &str,
    index: &TfIdfIndex,
    dict: &PronouncingDictionary,
    params: &RhymeParams,
) -> Result<Vec<CheckpointPoint>> {
    let verses = load_checkpoint_verses(dir, artist_id)?;
    external_checkpoint_suite(&verses, index, dict, params)
}
