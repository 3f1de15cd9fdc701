//! Count-based n-gram verse model with skip-gram backoff.
//!
//! Every verse is framed as `<s> line1 <lb> line2 ... </s>`. For a context of
//! `m` tokens the model first uses all `m` positions; when that context was
//! never seen it wildcards the most recent position while keeping the older
//! ones (`w1 w2 *`, then `w1 * *`, ...), and finally falls back to unigram
//! counts. There is no smoothing: the unigram level always has support.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Provenance, Verse};
use crate::error::{Error, Result};

pub const START: &str = "<s>";
pub const END: &str = "</s>";
pub const LINE_BREAK: &str = "<lb>";

pub const MAX_ORDER: usize = 9;
/// Generation cap, above the longest verse seen in real artist corpora.
pub const DEFAULT_MAX_TOKENS: usize = 1100;

type TokenId = u32;

fn is_sentinel(token: &str) -> bool {
    token == START || token == END || token == LINE_BREAK
}

/// Which counts answered a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackoffLevel {
    /// `visible` oldest context positions kept, `skipped` most recent ones wildcarded.
    Context { visible: usize, skipped: usize },
    Unigram,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub level: BackoffLevel,
    /// Raw continuation counts in lexicographic token order.
    pub counts: Vec<(String, u64)>,
}

impl Distribution {
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|(_, c)| c).sum()
    }

    pub fn probabilities(&self) -> Vec<(String, f64)> {
        let total = self.total() as f64;
        self.counts
            .iter()
            .map(|(t, c)| (t.clone(), *c as f64 / total))
            .collect()
    }

    pub fn probability(&self, token: &str) -> f64 {
        let total = self.total();
        self.counts
            .iter()
            .find(|(t, _)| t == token)
            .map_or(0.0, |(_, c)| *c as f64 / total as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenerationMode {
    #[default]
    Sample,
    /// Most frequent continuation, ties to the lexicographically smallest token.
    Greedy,
}

#[derive(Debug, Clone)]
pub struct NGramModel {
    order: usize,
    /// Sorted, so id order is lexicographic token order.
    vocabulary: Vec<String>,
    ids: HashMap<String, TokenId>,
    /// Indexed by the number of skipped (most recent) positions.
    tables: Vec<HashMap<Vec<TokenId>, BTreeMap<TokenId, u64>>>,
    unigram: BTreeMap<TokenId, u64>,
}

/// Framed token sequence of a verse.
pub fn frame_verse(verse: &Verse) -> Vec<&str> {
    let mut seq = Vec::with_capacity(verse.token_count + verse.lines.len() + 1);
    seq.push(START);
    for (i, line) in verse.lines.iter().enumerate() {
        if i > 0 {
            seq.push(LINE_BREAK);
        }
        seq.extend(line.iter().map(String::as_str));
    }
    seq.push(END);
    seq
}

impl NGramModel {
    pub fn train(verses: &[Verse], order: usize) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(Error::InvalidOrder(order));
        }
        if verses.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut vocabulary: Vec<String> = [START, END, LINE_BREAK]
            .iter()
            .map(|s| s.to_string())
            .chain(verses.iter().flat_map(|v| v.tokens().map(str::to_string)))
            .collect();
        vocabulary.sort();
        vocabulary.dedup();
        let ids: HashMap<String, TokenId> = vocabulary
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TokenId))
            .collect();

        let k = order - 1;
        let mut tables: Vec<HashMap<Vec<TokenId>, BTreeMap<TokenId, u64>>> = vec![HashMap::new(); k];
        let mut unigram = BTreeMap::new();
        for verse in verses {
            let seq: Vec<TokenId> = frame_verse(verse).iter().map(|t| ids[*t]).collect();
            for t in 1..seq.len() {
                let target = seq[t];
                *unigram.entry(target).or_insert(0) += 1;
                for m in 1..=k.min(t) {
                    let window = &seq[t - m..t];
                    for visible in 1..=m {
                        *tables[m - visible]
                            .entry(window[..visible].to_vec())
                            .or_default()
                            .entry(target)
                            .or_insert(0) += 1;
                    }
                }
            }
        }
        Ok(NGramModel {
            order,
            vocabulary,
            ids,
            tables,
            unigram,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    /// Counts for the first level, full context first, that has support
    /// outside `excluded`.
    fn lookup(&self, context: &[Option<TokenId>], excluded: &[TokenId]) -> (BackoffLevel, Vec<(TokenId, u64)>) {
        let k = self.order - 1;
        let m = k.min(context.len());
        let window = &context[context.len() - m..];
        let keep = |counts: &BTreeMap<TokenId, u64>| -> Vec<(TokenId, u64)> {
            counts
                .iter()
                .filter(|(t, _)| !excluded.contains(t))
                .map(|(t, c)| (*t, *c))
                .collect()
        };
        for visible in (1..=m).rev() {
            let prefix = &window[..visible];
            let Some(key) = prefix.iter().copied().collect::<Option<Vec<_>>>() else {
                continue;
            };
            if let Some(counts) = self.tables[m - visible].get(&key) {
                let kept = keep(counts);
                if !kept.is_empty() {
                    let level = BackoffLevel::Context {
                        visible,
                        skipped: m - visible,
                    };
                    return (level, kept);
                }
            }
        }
        (BackoffLevel::Unigram, keep(&self.unigram))
    }

    fn encode(&self, context: &[&str]) -> Vec<Option<TokenId>> {
        context.iter().map(|t| self.ids.get(*t).copied()).collect()
    }

    /// Continuation counts after `context`, backing off as needed.
    pub fn next_token_distribution(&self, context: &[&str]) -> Distribution {
        let (level, counts) = self.lookup(&self.encode(context), &[]);
        Distribution {
            level,
            counts: counts
                .into_iter()
                .map(|(t, c)| (self.vocabulary[t as usize].clone(), c))
                .collect(),
        }
    }

    /// Samples one verse. The end and line-break sentinels are not allowed
    /// before the first surface token.
    pub fn generate_verse(
        &self,
        artist_id: &str,
        verse_id: &str,
        checkpoint: u64,
        seed: u64,
        max_tokens: usize,
        mode: GenerationMode,
    ) -> Result<Verse> {
        if max_tokens < 1 {
            return Err(Error::InvalidMaxTokens);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start = self.ids[START];
        let end = self.ids[END];
        let lb = self.ids[LINE_BREAK];
        let mut history: Vec<Option<TokenId>> = vec![Some(start)];
        let mut lines: Vec<Vec<String>> = vec![Vec::new()];
        let mut surface = 0usize;
        let mut steps = 0usize;
        while steps < max_tokens {
            let excluded: &[TokenId] = if surface == 0 { &[end, lb, start] } else { &[start] };
            let (_, counts) = self.lookup(&history, excluded);
            if counts.is_empty() {
                break;
            }
            let next = match mode {
                GenerationMode::Greedy => {
                    let best = counts.iter().map(|(_, c)| *c).max().unwrap_or(0);
                    counts.iter().find(|(_, c)| *c == best).map(|(t, _)| *t)
                }
                GenerationMode::Sample => {
                    let total: u64 = counts.iter().map(|(_, c)| c).sum();
                    let mut draw = rng.gen_range(0..total);
                    counts
                        .iter()
                        .find(|(_, c)| {
                            if draw < *c {
                                true
                            } else {
                                draw -= c;
                                false
                            }
                        })
                        .map(|(t, _)| *t)
                }
            }
            .expect("non-empty distribution");
            steps += 1;
            if next == end {
                break;
            }
            if next == lb {
                lines.push(Vec::new());
            } else {
                surface += 1;
                if let Some(line) = lines.last_mut() {
                    line.push(self.vocabulary[next as usize].clone());
                }
            }
            history.push(Some(next));
        }
        Verse::new(
            artist_id,
            verse_id,
            lines,
            Provenance::Generated { checkpoint },
        )
        .ok_or(Error::EmptyVerse)
    }
}

/// Surface tokens never include sentinels.
pub fn contains_sentinel(verse: &Verse) -> bool {
    verse.tokens().any(is_sentinel)
}
