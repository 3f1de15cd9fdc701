use serde::{Deserialize, Serialize};

use super::regression::{fit_line, RegressionLine};
use crate::error::{Error, Result};
use crate::generator::CheckpointPoint;

/// Max similarity read off the fitted similarity line where the fitted
/// rhyme-density line reaches the artist's own average density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergedScore {
    pub target_rhyme_density: f64,
    /// May be negative or beyond the observed range.
    pub intersection_x: f64,
    pub similarity_at_target: f64,
    /// The intersection lies outside the observed x range.
    pub extrapolated: bool,
    pub rhyme_line: RegressionLine,
    pub similarity_line: RegressionLine,
}

pub fn merged_similarity(series: &[CheckpointPoint], target_rd: f64) -> Result<MergedScore> {
    if series.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: series.len(),
        });
    }
    let rd: Vec<(f64, f64)> = series.iter().map(|p| (p.x, p.avg_rhyme_density)).collect();
    let sim: Vec<(f64, f64)> = series.iter().map(|p| (p.x, p.avg_max_similarity)).collect();
    let rhyme_line = fit_line(&rd)?;
    let similarity_line = fit_line(&sim)?;
    if rhyme_line.slope == 0.0 {
        return Err(if rhyme_line.intercept == target_rd {
            Error::Underdetermined { target: target_rd }
        } else {
            Error::NoIntersection {
                intercept: rhyme_line.intercept,
                target: target_rd,
            }
        });
    }
    let x = (target_rd - rhyme_line.intercept) / rhyme_line.slope;
    let (lo, hi) = series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.x), hi.max(p.x))
        });
    Ok(MergedScore {
        target_rhyme_density: target_rd,
        intersection_x: x,
        similarity_at_target: similarity_line.at(x),
        extrapolated: x < lo || x > hi,
        rhyme_line,
        similarity_line,
    })
}
