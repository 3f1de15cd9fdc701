use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::types::{StyleMatchPage, VerseRef};
use crate::corpus::Verse;
use crate::error::{Error, Result};

/// Shortest verse shown as a choice.
pub const MIN_CHOICE_TOKENS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PageLayout {
    /// One target verse plus `choices_per_page - 1` distractors.
    pub choices_per_page: usize,
    pub min_tokens: usize,
}

impl Default for PageLayout {
    fn default() -> Self {
        PageLayout {
            choices_per_page: 4,
            min_tokens: MIN_CHOICE_TOKENS,
        }
    }
}

impl PageLayout {
    pub fn distractors_per_page(&self) -> usize {
        self.choices_per_page.saturating_sub(1)
    }

    /// Pages per evaluated verse given the number of distractor artists.
    pub fn pages_per_verse(&self, others: usize) -> Result<usize> {
        let per_page = self.distractors_per_page();
        if per_page == 0 || others == 0 || !others.is_multiple_of(per_page) {
            return Err(Error::Layout {
                others,
                per_page,
                remainder: if per_page == 0 { others } else { others % per_page },
            });
        }
        Ok(others / per_page)
    }
}

fn eligible<'a>(pool: &'a [Verse], min_tokens: usize, exclude: &str) -> Vec<&'a Verse> {
    pool.iter()
        .filter(|v| v.token_count >= min_tokens && v.verse_id != exclude)
        .collect()
}

fn verse_ref(v: &Verse) -> VerseRef {
    VerseRef {
        verse_id: v.verse_id.clone(),
        artist_id: v.artist_id.clone(),
    }
}

/// Style-matching pages for each evaluated verse. Every other artist in
/// `pools` contributes one distractor across the verse's pages, and each page
/// also carries an authentic verse of the target artist other than the
/// evaluated verse. Page ids are opaque and numbered in output order.
pub fn build_style_pages(
    eval_verses: &[Verse],
    pools: &BTreeMap<String, Vec<Verse>>,
    seed: u64,
    layout: PageLayout,
) -> Result<Vec<StyleMatchPage>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pages = Vec::new();
    for eval in eval_verses {
        let target = &eval.artist_id;
        let own = pools.get(target).map(Vec::as_slice).unwrap_or(&[]);
        let others: Vec<&String> = pools.keys().filter(|a| *a != target).collect();
        let n_pages = layout.pages_per_verse(others.len())?;

        let mut targets = eligible(own, layout.min_tokens, &eval.verse_id);
        if targets.len() < n_pages {
            return Err(Error::InsufficientPool {
                artist: target.clone(),
                needed: n_pages,
                available: targets.len(),
            });
        }
        targets.shuffle(&mut rng);

        let mut distractor_artists = others.clone();
        distractor_artists.shuffle(&mut rng);
        for (k, group) in distractor_artists
            .chunks(layout.distractors_per_page())
            .enumerate()
        {
            let mut choices = vec![verse_ref(targets[k])];
            for artist in group {
                let pool = eligible(&pools[*artist], layout.min_tokens, &eval.verse_id);
                let pick = pool.choose(&mut rng).ok_or_else(|| Error::InsufficientPool {
                    artist: (*artist).clone(),
                    needed: 1,
                    available: 0,
                })?;
                choices.push(verse_ref(pick));
            }
            let mut order: Vec<usize> = (0..choices.len()).collect();
            order.shuffle(&mut rng);
            let target_choice_index = order.iter().position(|&i| i == 0).unwrap_or(0);
            let choices = order.into_iter().map(|i| choices[i].clone()).collect();
            pages.push(StyleMatchPage {
                page_id: format!("p{:05}", pages.len() + 1),
                eval_verse: verse_ref(eval),
                eval_provenance: eval.provenance,
                choices,
                target_choice_index,
            });
        }
    }
    Ok(pages)
}

/// Round-robin pairs of distinct annotators: item `t` goes to annotators
/// `2t mod r` and `2t+1 mod r`.
pub fn assign_pairs(items: usize, annotators: &[String]) -> Result<Vec<[String; 2]>> {
    let r = annotators.len();
    if r < 2 {
        return Err(Error::Config(format!(
            "at least 2 annotators are needed, roster has {r}"
        )));
    }
    Ok((0..items)
        .map(|t| {
            [
                annotators[(2 * t) % r].clone(),
                annotators[(2 * t + 1) % r].clone(),
            ]
        })
        .collect())
}
