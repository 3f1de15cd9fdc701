use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Provenance;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnotationLabel {
    Strong,
    Weak,
    None,
}

impl AnnotationLabel {
    pub fn value(self) -> f64 {
        match self {
            AnnotationLabel::Strong => 1.0,
            AnnotationLabel::Weak => 0.5,
            AnnotationLabel::None => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineTask {
    Fluency,
    Coherence,
}

impl LineTask {
    /// First line index that can be judged.
    pub fn first_line(self) -> usize {
        match self {
            LineTask::Fluency => 0,
            LineTask::Coherence => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineAnnotation {
    pub task: LineTask,
    pub verse_id: String,
    pub line_index: usize,
    pub annotator_id: String,
    pub label: AnnotationLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VerseRef {
    pub verse_id: String,
    pub artist_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StyleMatchPage {
    pub page_id: String,
    pub eval_verse: VerseRef,
    pub eval_provenance: Provenance,
    pub choices: Vec<VerseRef>,
    /// Never sent to annotators.
    pub target_choice_index: usize,
}

impl StyleMatchPage {
    pub fn target_artist(&self) -> &str {
        &self.eval_verse.artist_id
    }

    pub fn is_authentic(&self) -> bool {
        self.eval_provenance == Provenance::Authentic
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StyleMatchAnnotation {
    pub page_id: String,
    pub annotator_id: String,
    pub chosen_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Style,
    Fluency,
    Coherence,
}

impl TaskKind {
    pub fn line_task(self) -> Option<LineTask> {
        match self {
            TaskKind::Style => None,
            TaskKind::Fluency => Some(LineTask::Fluency),
            TaskKind::Coherence => Some(LineTask::Coherence),
        }
    }
}

impl From<LineTask> for TaskKind {
    fn from(t: LineTask) -> Self {
        match t {
            LineTask::Fluency => TaskKind::Fluency,
            LineTask::Coherence => TaskKind::Coherence,
        }
    }
}

/// One exported judgment, one JSON object per line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub task: TaskKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub page_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verse_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_index: Option<usize>,
    pub annotator_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<AnnotationLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen_index: Option<usize>,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment_id: Option<String>,
}

impl AnnotationRecord {
    pub fn style(a: &StyleMatchAnnotation, timestamp: u64) -> Self {
        AnnotationRecord {
            task: TaskKind::Style,
            page_id: Some(a.page_id.clone()),
            verse_id: None,
            line_index: None,
            annotator_id: a.annotator_id.clone(),
            label: None,
            chosen_index: Some(a.chosen_index),
            timestamp,
            assignment_id: None,
        }
    }

    pub fn line(a: &LineAnnotation, timestamp: u64) -> Self {
        AnnotationRecord {
            task: a.task.into(),
            page_id: None,
            verse_id: Some(a.verse_id.clone()),
            line_index: Some(a.line_index),
            annotator_id: a.annotator_id.clone(),
            label: Some(a.label),
            chosen_index: None,
            timestamp,
            assignment_id: None,
        }
    }

    fn malformed(&self, what: &str) -> Error {
        Error::Config(format!(
            "{:?} record from {} lacks {what}",
            self.task, self.annotator_id
        ))
    }
}

/// Splits exported records into line judgments and style choices.
pub fn split_records(
    records: &[AnnotationRecord],
) -> Result<(Vec<LineAnnotation>, Vec<StyleMatchAnnotation>)> {
    let mut lines = Vec::new();
    let mut styles = Vec::new();
    for r in records {
        match r.task.line_task() {
            None => styles.push(StyleMatchAnnotation {
                page_id: r.page_id.clone().ok_or_else(|| r.malformed("page_id"))?,
                annotator_id: r.annotator_id.clone(),
                chosen_index: r.chosen_index.ok_or_else(|| r.malformed("chosen_index"))?,
            }),
            Some(task) => lines.push(LineAnnotation {
                task,
                verse_id: r.verse_id.clone().ok_or_else(|| r.malformed("verse_id"))?,
                line_index: r.line_index.ok_or_else(|| r.malformed("line_index"))?,
                annotator_id: r.annotator_id.clone(),
                label: r.label.ok_or_else(|| r.malformed("label"))?,
            }),
        }
    }
    Ok((lines, styles))
}

pub fn read_jsonl(path: &Path) -> Result<Vec<AnnotationRecord>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

pub fn write_jsonl(mut w: impl Write, records: &[AnnotationRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
