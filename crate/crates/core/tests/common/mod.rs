//! Brute-force reference implementations and random fixtures shared by the
//! oracle tests and the acceptance run.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use ghosteval::annotation::{StyleMatchAnnotation, StyleMatchPage, VerseRef};
use ghosteval::corpus::{Provenance, Verse};
use ghosteval::generator::{frame_verse, BackoffLevel};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const GOLDEN_VERSE: &str = "\
we wander slowly through the night
a candle gives a tiny light
his brother sent a long letter
and swore that nobody met her
the river carried heavy rain
and washed away the morning train
the door and window were broken
and each word we said was spoken
they left the city all alone
and slept beside a silent stone";

pub const INTERNAL_RHYME_LINE: &str = "new york city gritty committee pity the fool";
pub const FOUR_SYLLABLE_LINE: &str = "how i made it you salivated over my calibrated";
pub const POLYSYLLABIC_COUPLET: &str =
    "but it was your op to shop stolen art\ncatch a swollen heart form not rolling smart";

pub fn verse(id: &str, text: &str) -> Verse {
    Verse::from_text("t", id, text, Provenance::Authentic).unwrap()
}

/// Random corpus of at most `max_tokens` surface tokens over a small vocabulary.
pub fn random_corpus(rng: &mut ChaCha8Rng, max_tokens: usize, vocab: usize) -> Vec<Verse> {
    let words: Vec<String> = (0..vocab).map(|i| format!("w{i}")).collect();
    let n_verses = rng.gen_range(1..=6);
    let budget = max_tokens / n_verses;
    (0..n_verses)
        .map(|k| {
            let len = rng.gen_range(1..=budget.max(1));
            let mut lines = vec![Vec::new()];
            for _ in 0..len {
                if !lines.last().unwrap().is_empty() && rng.gen_bool(0.2) {
                    lines.push(Vec::new());
                }
                lines.last_mut().unwrap().push(words.choose(rng).unwrap().clone());
            }
            Verse::new("t", format!("v{k}"), lines, Provenance::Authentic).unwrap()
        })
        .collect()
}

/// Next-token counts straight from the framed sequences: the full window
/// first, then wildcarding the most recent positions one at a time, then
/// unigram counts over every predicted position.
pub fn ngram_oracle(verses: &[Verse], order: usize, context: &[&str]) -> (BackoffLevel, Vec<(String, u64)>) {
    let seqs: Vec<Vec<&str>> = verses.iter().map(frame_verse).collect();
    let m = (order - 1).min(context.len());
    let window = &context[context.len() - m..];
    for visible in (1..=m).rev() {
        let key = &window[..visible];
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for seq in &seqs {
            for t in m.max(1)..seq.len() {
                if &seq[t - m..t - m + visible] == key {
                    *counts.entry(seq[t].to_string()).or_default() += 1;
                }
            }
        }
        if !counts.is_empty() {
            return (
                BackoffLevel::Context {
                    visible,
                    skipped: m - visible,
                },
                counts.into_iter().collect(),
            );
        }
    }
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for seq in &seqs {
        for tok in &seq[1..] {
            *counts.entry(tok.to_string()).or_default() += 1;
        }
    }
    (BackoffLevel::Unigram, counts.into_iter().collect())
}

/// Dense tf-idf matrix and cosine against every training verse.
pub fn dense_max_cosine(training: &[Verse], candidate: &Verse) -> f64 {
    let vocab: Vec<String> = training
        .iter()
        .flat_map(|v| v.tokens().map(str::to_string))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let n = training.len() as f64;
    let tf = |v: &Verse| -> Vec<f64> {
        vocab
            .iter()
            .map(|w| v.tokens().filter(|t| t == w).count() as f64)
            .collect()
    };
    let idf: Vec<f64> = vocab
        .iter()
        .map(|w| {
            let df = training.iter().filter(|v| v.tokens().any(|t| t == w)).count() as f64;
            (n / df).ln()
        })
        .collect();
    let weigh = |v: &Verse| -> Vec<f64> { tf(v).iter().zip(&idf).map(|(a, b)| a * b).collect() };
    let q = weigh(candidate);
    let qn = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut best = 0.0f64;
    for d in training {
        let dv = weigh(d);
        let dn = dv.iter().map(|x| x * x).sum::<f64>().sqrt();
        if qn == 0.0 || dn == 0.0 {
            continue;
        }
        let dot: f64 = q.iter().zip(&dv).map(|(a, b)| a * b).sum();
        best = best.max(dot / (qn * dn));
    }
    best
}

/// Slope and intercept from the raw-sum normal equations.
pub fn ols_closed_form(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    (slope, (sy - slope * sx) / n)
}

/// Random style pages over `artists` with two random annotations each.
pub fn random_pages(
    rng: &mut ChaCha8Rng,
    artists: usize,
    pages: usize,
    choices: usize,
) -> (Vec<StyleMatchPage>, Vec<StyleMatchAnnotation>) {
    let names: Vec<String> = (0..artists).map(|i| format!("a{i}")).collect();
    let mut out = Vec::new();
    let mut anns = Vec::new();
    for p in 0..pages {
        let target = names.choose(rng).unwrap().clone();
        let others: Vec<&String> = names.iter().filter(|n| **n != target).collect();
        let mut artists_on_page = vec![target.clone()];
        artists_on_page.extend(others.choose_multiple(rng, choices - 1).map(|s| (*s).clone()));
        artists_on_page.shuffle(rng);
        let target_choice_index = artists_on_page.iter().position(|a| *a == target).unwrap();
        let page_id = format!("p{p}");
        out.push(StyleMatchPage {
            page_id: page_id.clone(),
            eval_verse: VerseRef {
                verse_id: format!("{target}/eval{p}"),
                artist_id: target.clone(),
            },
            eval_provenance: if rng.gen_bool(0.7) {
                Provenance::Authentic
            } else {
                Provenance::Generated { checkpoint: 1 }
            },
            choices: artists_on_page
                .iter()
                .enumerate()
                .map(|(i, a)| VerseRef {
                    verse_id: format!("{a}/c{p}-{i}"),
                    artist_id: a.clone(),
                })
                .collect(),
            target_choice_index,
        });
        for who in ["x", "y"] {
            anns.push(StyleMatchAnnotation {
                page_id: page_id.clone(),
                annotator_id: who.into(),
                chosen_index: rng.gen_range(0..choices),
            });
        }
    }
    (out, anns)
}
