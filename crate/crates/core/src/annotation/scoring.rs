use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::types::{
    AnnotationLabel, LineAnnotation, LineTask, StyleMatchAnnotation, StyleMatchPage,
};
use crate::corpus::Verse;
use crate::error::{Error, Result};

/// Annotations each line and page is expected to receive.
pub const ANNOTATIONS_PER_ITEM: usize = 2;

/// Label counts over the judged lines of one verse.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineTally {
    pub strong: usize,
    pub weak: usize,
    pub none: usize,
}

impl LineTally {
    pub fn add(&mut self, label: AnnotationLabel) {
        match label {
            AnnotationLabel::Strong => self.strong += 1,
            AnnotationLabel::Weak => self.weak += 1,
            AnnotationLabel::None => self.none += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.strong + self.weak + self.none
    }

    /// (#strong + 0.5·#weak) / #total, `None` with no labels.
    pub fn score(&self) -> Option<f64> {
        let a = self.total();
        (a > 0).then(|| (self.strong as f64 + 0.5 * self.weak as f64) / a as f64)
    }
}

/// Coherence records for lines identical to the line before them are forced
/// to `None`. Applying it twice changes nothing further.
pub fn apply_repetition_rule(verse: &Verse, annotations: &[LineAnnotation]) -> Vec<LineAnnotation> {
    annotations
        .iter()
        .map(|a| {
            let repeated = a.task == LineTask::Coherence
                && a.verse_id == verse.verse_id
                && a.line_index >= 1
                && a.line_index < verse.lines.len()
                && verse.lines[a.line_index] == verse.lines[a.line_index - 1];
            if repeated {
                LineAnnotation {
                    label: AnnotationLabel::None,
                    ..a.clone()
                }
            } else {
                a.clone()
            }
        })
        .collect()
}

/// Tally of one task over one verse. Every judged line must carry exactly
/// two labels; offending lines are listed in the error.
pub fn line_tally(annotations: &[LineAnnotation], verse: &Verse, task: LineTask) -> Result<LineTally> {
    let n = verse.lines.len();
    let first = task.first_line();
    let mut per_line = vec![LineTally::default(); n];
    let mut stray = BTreeSet::new();
    for a in annotations
        .iter()
        .filter(|a| a.task == task && a.verse_id == verse.verse_id)
    {
        if a.line_index < first || a.line_index >= n {
            stray.insert(a.line_index);
        } else {
            per_line[a.line_index].add(a.label);
        }
    }
    let mut bad: BTreeSet<usize> = (first..n)
        .filter(|&i| per_line[i].total() != ANNOTATIONS_PER_ITEM)
        .collect();
    bad.extend(stray);
    if !bad.is_empty() {
        return Err(Error::IncompleteAnnotation {
            item: verse.verse_id.clone(),
            lines: bad.into_iter().collect(),
        });
    }
    let mut tally = LineTally::default();
    for t in &per_line[first.min(n)..] {
        tally.strong += t.strong;
        tally.weak += t.weak;
        tally.none += t.none;
    }
    Ok(tally)
}

pub fn fluency_score(annotations: &[LineAnnotation], verse: &Verse) -> Result<f64> {
    let tally = line_tally(annotations, verse, LineTask::Fluency)?;
    tally.score().ok_or(Error::EmptyVerse)
}

/// Coherence over lines 1.. after the repetition pre-pass. `None` for a
/// single-line verse.
pub fn coherence_score(annotations: &[LineAnnotation], verse: &Verse) -> Result<Option<f64>> {
    let fixed = apply_repetition_rule(verse, annotations);
    Ok(line_tally(&fixed, verse, LineTask::Coherence)?.score())
}

/// Share of judged lines on which both annotators gave the same label.
/// `None` when there are no annotations.
pub fn raw_iaa(annotations: &[LineAnnotation]) -> Result<Option<f64>> {
    let mut items: BTreeMap<(LineTask, &str, usize), Vec<AnnotationLabel>> = BTreeMap::new();
    for a in annotations {
        items
            .entry((a.task, a.verse_id.as_str(), a.line_index))
            .or_default()
            .push(a.label);
    }
    let mut bad: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for ((_, verse, line), labels) in &items {
        if labels.len() != ANNOTATIONS_PER_ITEM {
            bad.entry(verse).or_default().push(*line);
        }
    }
    if let Some((verse, lines)) = bad.into_iter().next() {
        return Err(Error::IncompleteAnnotation {
            item: verse.to_string(),
            lines,
        });
    }
    if items.is_empty() {
        return Ok(None);
    }
    let agree = items.values().filter(|l| l[0] == l[1]).count();
    Ok(Some(agree as f64 / items.len() as f64))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchTally {
    /// Annotations choosing the target.
    pub m: usize,
    /// All annotations.
    pub a: usize,
    /// Agreed pages whose shared choice is the target.
    pub m_a: usize,
    /// Pages where both annotators chose the same index.
    pub s_a: usize,
    pub pages: usize,
}

fn pct(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| 100.0 * num as f64 / den as f64)
}

impl MatchTally {
    pub fn match_pct(&self) -> Option<f64> {
        pct(self.m, self.a)
    }

    pub fn match_agreed_pct(&self) -> Option<f64> {
        pct(self.m_a, self.s_a)
    }

    pub fn agreement_pct(&self) -> Option<f64> {
        pct(self.s_a, self.pages)
    }
}

fn group_by_page<'a>(
    pages: &[&StyleMatchPage],
    annotations: &'a [StyleMatchAnnotation],
) -> Result<HashMap<String, Vec<&'a StyleMatchAnnotation>>> {
    let mut by_page: HashMap<String, Vec<&StyleMatchAnnotation>> =
        pages.iter().map(|p| (p.page_id.clone(), Vec::new())).collect();
    for a in annotations {
        if let Some(v) = by_page.get_mut(&a.page_id) {
            v.push(a);
        }
    }
    for p in pages {
        let got = &by_page[&p.page_id];
        if got.len() != ANNOTATIONS_PER_ITEM {
            return Err(Error::IncompletePage {
                page_id: p.page_id.clone(),
                got: got.len(),
                expected: ANNOTATIONS_PER_ITEM,
            });
        }
        if let Some(bad) = got.iter().find(|a| a.chosen_index >= p.choices.len()) {
            return Err(Error::Config(format!(
                "page {} has {} choices, annotator {} chose {}",
                p.page_id,
                p.choices.len(),
                bad.annotator_id,
                bad.chosen_index
            )));
        }
    }
    Ok(by_page)
}

/// Tally over the given pages. Annotations for other pages are ignored.
pub fn match_stats(pages: &[&StyleMatchPage], annotations: &[StyleMatchAnnotation]) -> Result<MatchTally> {
    let by_page = group_by_page(pages, annotations)?;
    let mut t = MatchTally {
        pages: pages.len(),
        ..MatchTally::default()
    };
    for p in pages {
        let anns = &by_page[&p.page_id];
        t.a += anns.len();
        t.m += anns
            .iter()
            .filter(|a| a.chosen_index == p.target_choice_index)
            .count();
        if anns[0].chosen_index == anns[1].chosen_index {
            t.s_a += 1;
            if anns[0].chosen_index == p.target_choice_index {
                t.m_a += 1;
            }
        }
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRow {
    pub artist: String,
    pub authentic: MatchTally,
    pub generated: MatchTally,
}

/// Per-artist tallies split by whether the evaluated verse was authentic or
/// generated, ordered by artist.
pub fn match_table(pages: &[StyleMatchPage], annotations: &[StyleMatchAnnotation]) -> Result<Vec<MatchRow>> {
    let mut groups: BTreeMap<&str, (Vec<&StyleMatchPage>, Vec<&StyleMatchPage>)> = BTreeMap::new();
    for p in pages {
        let g = groups.entry(p.target_artist()).or_default();
        if p.is_authentic() {
            g.0.push(p);
        } else {
            g.1.push(p);
        }
    }
    groups
        .into_iter()
        .map(|(artist, (auth, gen))| {
            Ok(MatchRow {
                artist: artist.to_string(),
                authentic: match_stats(&auth, annotations)?,
                generated: match_stats(&gen, annotations)?,
            })
        })
        .collect()
}

/// Ordered-pair counts: `p[(a,b)]` pages of `a` showing a verse of `b`,
/// `c[(a,b)]` annotations on those pages picking `b`'s verse.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfusionTally {
    pub c: BTreeMap<(String, String), usize>,
    pub p: BTreeMap<(String, String), usize>,
}

/// Counts over authentic-verse pages only.
pub fn confusion_tally(pages: &[StyleMatchPage], annotations: &[StyleMatchAnnotation]) -> Result<ConfusionTally> {
    let auth: Vec<&StyleMatchPage> = pages.iter().filter(|p| p.is_authentic()).collect();
    let by_page = group_by_page(&auth, annotations)?;
    let mut t = ConfusionTally::default();
    for page in &auth {
        let a = page.target_artist();
        for choice in &page.choices {
            if choice.artist_id != a {
                *t.p.entry((a.to_string(), choice.artist_id.clone())).or_default() += 1;
            }
        }
        for ann in &by_page[&page.page_id] {
            let b = &page.choices[ann.chosen_index].artist_id;
            if b != a {
                *t.c.entry((a.to_string(), b.clone())).or_default() += 1;
            }
        }
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub artists: Vec<String>,
    /// `None` on the diagonal and for pairs never shown together.
    pub values: Vec<Vec<Option<f64>>>,
}

impl ConfusionMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.artists.iter().position(|x| x == a)?;
        let j = self.artists.iter().position(|x| x == b)?;
        self.values[i][j]
    }

    /// Pairs whose confusion exceeds 1, which only happens when both
    /// annotators keep picking the same distractor.
    pub fn flagged(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (i, row) in self.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate().skip(i + 1) {
                if v.is_some_and(|v| v > 1.0) {
                    out.push((self.artists[i].clone(), self.artists[j].clone()));
                }
            }
        }
        out
    }
}

/// Symmetric confusion (c(a,b)+c(b,a)) / (p(a,b)+p(b,a)) over every artist
/// appearing on an authentic page.
pub fn confusion_matrix(pages: &[StyleMatchPage], annotations: &[StyleMatchAnnotation]) -> Result<ConfusionMatrix> {
    let t = confusion_tally(pages, annotations)?;
    let artists: Vec<String> = pages
        .iter()
        .filter(|p| p.is_authentic())
        .flat_map(|p| {
            std::iter::once(p.eval_verse.artist_id.clone())
                .chain(p.choices.iter().map(|c| c.artist_id.clone()))
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let k = artists.len();
    let mut values = vec![vec![None; k]; k];
    let get = |m: &BTreeMap<(String, String), usize>, a: &str, b: &str| {
        m.get(&(a.to_string(), b.to_string())).copied().unwrap_or(0)
    };
    for i in 0..k {
        for j in (i + 1)..k {
            let (a, b) = (&artists[i], &artists[j]);
            let shown = get(&t.p, a, b) + get(&t.p, b, a);
            let chosen = get(&t.c, a, b) + get(&t.c, b, a);
            let v = (shown > 0).then(|| chosen as f64 / shown as f64);
            values[i][j] = v;
            values[j][i] = v;
        }
    }
    Ok(ConfusionMatrix { artists, values })
}
