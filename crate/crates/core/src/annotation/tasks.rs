//! Annotation work plan: who annotates what, the blind payloads shown to
//! annotators, and validation of their submissions.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::pages::assign_pairs;
use super::types::{AnnotationLabel, AnnotationRecord, LineTask, StyleMatchPage, TaskKind};
use crate::corpus::Verse;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub assignment_id: String,
    pub annotator_id: String,
    pub kind: TaskKind,
    /// Page id for style tasks, verse id otherwise. Never served.
    pub item_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationPlan {
    pub pages: Vec<StyleMatchPage>,
    /// Verse ids judged line by line, for both fluency and coherence.
    pub line_verses: Vec<String>,
    /// Display lines of every verse referenced above.
    pub texts: BTreeMap<String, Vec<String>>,
    pub assignments: Vec<Assignment>,
}

/// What an annotator sees. Carries text only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TaskPayload {
    Style {
        verse: Vec<String>,
        choices: Vec<Vec<String>>,
    },
    Fluency {
        lines: Vec<String>,
        eligible: Vec<usize>,
    },
    Coherence {
        lines: Vec<String>,
        eligible: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServedTask {
    pub assignment_id: String,
    pub payload: TaskPayload,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineLabel {
    pub line_index: usize,
    pub label: AnnotationLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SubmissionBody {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<LineLabel>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SubmissionError {
    #[error("missing labels for lines {0:?}")]
    MissingLines(Vec<usize>),
    #[error("labels for lines {0:?} are not accepted")]
    UnexpectedLines(Vec<usize>),
    #[error("chosen_index {chosen} outside 0..{choices}")]
    ChoiceOutOfRange { chosen: usize, choices: usize },
    #[error("a {0:?} task needs {1}")]
    WrongShape(TaskKind, &'static str),
}

fn display_lines(v: &Verse) -> Vec<String> {
    v.lines.iter().map(|l| l.join(" ")).collect()
}

/// Two distinct annotators per style page and per line-task verse, handed
/// out round-robin in the order pages, fluency verses, coherence verses.
pub fn build_plan(
    pages: Vec<StyleMatchPage>,
    line_verses: &[&Verse],
    known: &[&Verse],
    annotators: &[String],
) -> Result<AnnotationPlan> {
    let lookup: HashMap<&str, &Verse> = known
        .iter()
        .chain(line_verses)
        .map(|v| (v.verse_id.as_str(), *v))
        .collect();
    let mut texts = BTreeMap::new();
    let mut add = |id: &str| -> Result<()> {
        let v = lookup
            .get(id)
            .ok_or_else(|| Error::Config(format!("plan references unknown verse {id}")))?;
        texts.insert(id.to_string(), display_lines(v));
        Ok(())
    };
    for p in &pages {
        add(&p.eval_verse.verse_id)?;
        for c in &p.choices {
            add(&c.verse_id)?;
        }
    }
    for v in line_verses {
        add(&v.verse_id)?;
    }

    let mut items: Vec<(TaskKind, String)> = pages
        .iter()
        .map(|p| (TaskKind::Style, p.page_id.clone()))
        .collect();
    for kind in [TaskKind::Fluency, TaskKind::Coherence] {
        items.extend(line_verses.iter().map(|v| (kind, v.verse_id.clone())));
    }
    let pairs = assign_pairs(items.len(), annotators)?;
    let mut assignments = Vec::with_capacity(items.len() * 2);
    for ((kind, item_id), pair) in items.into_iter().zip(pairs) {
        for annotator_id in pair {
            assignments.push(Assignment {
                assignment_id: format!("t{:05}", assignments.len() + 1),
                annotator_id,
                kind,
                item_id: item_id.clone(),
            });
        }
    }
    Ok(AnnotationPlan {
        pages,
        line_verses: line_verses.iter().map(|v| v.verse_id.clone()).collect(),
        texts,
        assignments,
    })
}

fn eligible_lines(task: LineTask, n: usize) -> Vec<usize> {
    (task.first_line()..n).collect()
}

impl AnnotationPlan {
    pub fn page(&self, page_id: &str) -> Option<&StyleMatchPage> {
        self.pages.iter().find(|p| p.page_id == page_id)
    }

    fn text(&self, verse_id: &str) -> Vec<String> {
        self.texts.get(verse_id).cloned().unwrap_or_default()
    }

    pub fn payload(&self, a: &Assignment) -> TaskPayload {
        match a.kind.line_task() {
            None => {
                let page = self.page(&a.item_id);
                TaskPayload::Style {
                    verse: page.map(|p| self.text(&p.eval_verse.verse_id)).unwrap_or_default(),
                    choices: page
                        .map(|p| p.choices.iter().map(|c| self.text(&c.verse_id)).collect())
                        .unwrap_or_default(),
                }
            }
            Some(task) => {
                let lines = self.text(&a.item_id);
                let eligible = eligible_lines(task, lines.len());
                match task {
                    LineTask::Fluency => TaskPayload::Fluency { lines, eligible },
                    LineTask::Coherence => TaskPayload::Coherence { lines, eligible },
                }
            }
        }
    }

    pub fn serve(&self, a: &Assignment) -> ServedTask {
        ServedTask {
            assignment_id: a.assignment_id.clone(),
            payload: self.payload(a),
        }
    }

    /// Records produced by a complete submission, stamped with `timestamp`.
    pub fn records_for(
        &self,
        a: &Assignment,
        body: &SubmissionBody,
        timestamp: u64,
    ) -> Result<Vec<AnnotationRecord>, SubmissionError> {
        let base = AnnotationRecord {
            task: a.kind,
            page_id: None,
            verse_id: None,
            line_index: None,
            annotator_id: a.annotator_id.clone(),
            label: None,
            chosen_index: None,
            timestamp,
            assignment_id: Some(a.assignment_id.clone()),
        };
        match a.kind.line_task() {
            None => {
                if body.labels.is_some() {
                    return Err(SubmissionError::WrongShape(a.kind, "chosen_index only"));
                }
                let chosen = body
                    .chosen_index
                    .ok_or(SubmissionError::WrongShape(a.kind, "chosen_index"))?;
                let choices = self.page(&a.item_id).map_or(0, |p| p.choices.len());
                if chosen >= choices {
                    return Err(SubmissionError::ChoiceOutOfRange { chosen, choices });
                }
                Ok(vec![AnnotationRecord {
                    page_id: Some(a.item_id.clone()),
                    chosen_index: Some(chosen),
                    ..base
                }])
            }
            Some(task) => {
                if body.chosen_index.is_some() {
                    return Err(SubmissionError::WrongShape(a.kind, "labels only"));
                }
                let labels = body
                    .labels
                    .as_ref()
                    .ok_or(SubmissionError::WrongShape(a.kind, "labels"))?;
                let n = self.texts.get(&a.item_id).map_or(0, Vec::len);
                let eligible: BTreeSet<usize> = eligible_lines(task, n).into_iter().collect();
                let mut given = BTreeMap::new();
                let mut unexpected = BTreeSet::new();
                for l in labels {
                    if !eligible.contains(&l.line_index) || given.insert(l.line_index, l.label).is_some() {
                        unexpected.insert(l.line_index);
                    }
                }
                if !unexpected.is_empty() {
                    return Err(SubmissionError::UnexpectedLines(unexpected.into_iter().collect()));
                }
                let missing: Vec<usize> = eligible.iter().filter(|i| !given.contains_key(i)).copied().collect();
                if !missing.is_empty() {
                    return Err(SubmissionError::MissingLines(missing));
                }
                Ok(given
                    .into_iter()
                    .map(|(line, label)| AnnotationRecord {
                        verse_id: Some(a.item_id.clone()),
                        line_index: Some(line),
                        label: Some(label),
                        ..base.clone()
                    })
                    .collect())
            }
        }
    }
}
