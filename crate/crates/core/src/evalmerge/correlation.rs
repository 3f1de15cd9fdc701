use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pearson correlation; `None` when either column has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "columns must have equal length");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Labeled correlation table. `None` cells are undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    pub fn get(&self, row: &str, column: &str) -> Option<f64> {
        let r = self.rows.iter().position(|x| x == row)?;
        let c = self.columns.iter().position(|x| x == column)?;
        self.values[r][c]
    }
}

/// Per-artist metric row feeding the correlation tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtistMetrics {
    pub artist: String,
    pub coherence: f64,
    pub fluency: f64,
    pub similarity: f64,
    pub matching: f64,
    pub verses: Option<f64>,
    pub tokens: Option<f64>,
    pub richness: Option<f64>,
}

pub const METRIC_NAMES: [&str; 4] = ["coherence", "fluency", "similarity", "matching"];
pub const COVARIATE_NAMES: [&str; 3] = ["verses", "tokens", "vocab_richness"];

fn metric_columns(rows: &[ArtistMetrics]) -> Vec<Vec<f64>> {
    vec![
        rows.iter().map(|r| r.coherence).collect(),
        rows.iter().map(|r| r.fluency).collect(),
        rows.iter().map(|r| r.similarity).collect(),
        rows.iter().map(|r| r.matching).collect(),
    ]
}

/// Symmetric correlation matrix of the named columns. Columns with zero
/// variance are undefined everywhere, including the diagonal.
pub fn correlation_matrix(names: &[&str], columns: &[Vec<f64>]) -> CorrelationMatrix {
    let k = columns.len();
    let mut values = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i..k {
            let r = pearson(&columns[i], &columns[j]);
            let r = if i == j { r.map(|_| 1.0) } else { r };
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    CorrelationMatrix {
        rows: names.clone(),
        columns: names,
        values,
    }
}

pub fn metric_correlations(rows: &[ArtistMetrics]) -> Result<CorrelationMatrix> {
    if rows.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: rows.len(),
        });
    }
    Ok(correlation_matrix(&METRIC_NAMES, &metric_columns(rows)))
}

/// Corpus size covariates against each metric. Rows lacking a covariate are
/// left out of that covariate's correlations.
pub fn covariate_correlations(rows: &[ArtistMetrics]) -> Result<CorrelationMatrix> {
    if rows.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: rows.len(),
        });
    }
    let covariate = |r: &ArtistMetrics, i: usize| match i {
        0 => r.verses,
        1 => r.tokens,
        _ => r.richness,
    };
    let metric = |r: &ArtistMetrics, j: usize| match j {
        0 => r.coherence,
        1 => r.fluency,
        2 => r.similarity,
        _ => r.matching,
    };
    let mut values = vec![vec![None; METRIC_NAMES.len()]; COVARIATE_NAMES.len()];
    for (i, row) in values.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let (xs, ys): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter_map(|r| covariate(r, i).map(|c| (c, metric(r, j))))
                .unzip();
            if xs.len() >= 3 {
                *cell = pearson(&xs, &ys);
            }
        }
    }
    Ok(CorrelationMatrix {
        rows: COVARIATE_NAMES.iter().map(|s| s.to_string()).collect(),
        columns: METRIC_NAMES.iter().map(|s| s.to_string()).collect(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_and_anti_correlation() {
        let x = [1.0, 2.0, 4.0, 7.0];
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &y).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_is_undefined() {
        let m = correlation_matrix(&["a", "b"], &[vec![1.0, 2.0, 3.0], vec![5.0, 5.0, 5.0]]);
        assert_eq!(m.values[0][0], Some(1.0));
        assert_eq!(m.values[1][1], None);
        assert_eq!(m.values[0][1], None);
    }

    #[test]
    fn too_few_rows() {
        assert!(metric_correlations(&[]).is_err());
    }
}
