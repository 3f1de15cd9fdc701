use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("verse is empty")]
    EmptyVerse,
    #[error("training set is empty")]
    EmptyTraining,
    #[error("input is not valid UTF-8: {0}")]
    Decode(#[from] std::str::Utf8Error),
    #[error("duplicate verse id {0}")]
    DuplicateVerse(String),
    #[error("invalid cleaning rule {pattern:?}: {source}")]
    Rule {
        pattern: String,
        #[source]
        source: regex::Error,
    },

    #[error("verse {verse_id} has no pronounceable syllables")]
    Unpronounceable { verse_id: String },

    #[error("n-gram order {0} outside 1..=9")]
    InvalidOrder(usize),
    #[error("max_tokens must be at least 1")]
    InvalidMaxTokens,
    #[error("no checkpoint verses within the window of iteration {x}")]
    MissingCheckpoint { x: u64 },
    #[error("malformed checkpoint file name {0:?}")]
    CheckpointName(String),

    #[error("degenerate fit: all x values are equal")]
    DegenerateFit,
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("rhyme density line is horizontal at {intercept} and never reaches {target}")]
    NoIntersection { intercept: f64, target: f64 },
    #[error("rhyme density line is horizontal at the target {target}; intersection is underdetermined")]
    Underdetermined { target: f64 },

    #[error("artist {artist} has {available} eligible verses, {needed} needed")]
    InsufficientPool {
        artist: String,
        needed: usize,
        available: usize,
    },
    #[error("{others} distractor artists cannot be split into pages of {per_page} (remainder {remainder})")]
    Layout {
        others: usize,
        per_page: usize,
        remainder: usize,
    },
    #[error("incomplete annotation for {item}: lines {lines:?}")]
    IncompleteAnnotation { item: String, lines: Vec<usize> },
    #[error("page {page_id} has {got} annotations, expected {expected}")]
    IncompletePage {
        page_id: String,
        got: usize,
        expected: usize,
    },

    #[error("missing input {}", .0.display())]
    MissingInput(PathBuf),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        if source.kind() == std::io::ErrorKind::NotFound {
            return Error::MissingInput(path.into());
        }
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
