use serde::{Deserialize, Serialize};

use crate::corpus::{Provenance, Verse};

/// Longest generated verse of an artist and when it was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureRow {
    pub artist: String,
    pub max_len: usize,
    pub checkpoint: u64,
    /// 100 × checkpoint / total iterations, when the total is known.
    pub percent_of_training: Option<f64>,
    /// Average authentic verse length, for comparison.
    pub corpus_avg_len: Option<f64>,
}

/// `None` when no generated verse is given. Ties keep the earliest checkpoint.
pub fn verse_structure_report(
    artist: &str,
    generated: &[Verse],
    corpus_avg_len: Option<f64>,
    total_iterations: Option<u64>,
) -> Option<StructureRow> {
    let mut best: Option<(usize, u64)> = None;
    for v in generated {
        let Provenance::Generated { checkpoint } = v.provenance else {
            continue;
        };
        let better = match best {
            None => true,
            Some((len, cp)) => v.token_count > len || (v.token_count == len && checkpoint < cp),
        };
        if better {
            best = Some((v.token_count, checkpoint));
        }
    }
    let (max_len, checkpoint) = best?;
    Some(StructureRow {
        artist: artist.to_string(),
        max_len,
        checkpoint,
        percent_of_training: total_iterations
            .filter(|t| *t > 0)
            .map(|t| 100.0 * checkpoint as f64 / t as f64),
        corpus_avg_len,
    })
}
