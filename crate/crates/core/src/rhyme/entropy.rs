use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Verse;

/// How token entropy is scaled into a weight in `[0, 1]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyNormalization {
    /// `H / log2(n)`: all-distinct tokens give 1, one repeated token gives 0.
    #[default]
    LogTokens,
    /// `H / n`, the literal "divide by the number of tokens" reading.
    Literal,
}

/// Shannon entropy in bits of the empirical distribution of `tokens`.
pub fn entropy_bits<'a>(tokens: impl IntoIterator<Item = &'a str>) -> (f64, usize) {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut n = 0usize;
    for t in tokens {
        *counts.entry(t).or_insert(0) += 1;
        n += 1;
    }
    if n == 0 {
        return (0.0, 0);
    }
    // sort so the float sum does not depend on hash order
    let mut c: Vec<usize> = counts.into_values().collect();
    c.sort_unstable();
    let total = n as f64;
    let h = c
        .iter()
        .map(|&k| {
            let p = k as f64 / total;
            -p * p.log2()
        })
        .sum::<f64>();
    (h.max(0.0), n)
}

pub fn entropy_weight(verse: &Verse, normalization: EntropyNormalization) -> f64 {
    let (h, n) = entropy_bits(verse.tokens());
    weight_from_entropy(h, n, normalization)
}

pub(crate) fn weight_from_entropy(h: f64, n: usize, normalization: EntropyNormalization) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let w = match normalization {
        EntropyNormalization::LogTokens => h / (n as f64).log2(),
        EntropyNormalization::Literal => h / n as f64,
    };
    w.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Provenance;

    fn verse(text: &str) -> Verse {
        Verse::from_text("x", "v", text, Provenance::Authentic).unwrap()
    }

    #[test]
    fn repeated_token_weighs_zero() {
        let v = verse(&vec!["yeah"; 50].join(" "));
        assert_eq!(entropy_bits(v.tokens()).0, 0.0);
        assert_eq!(entropy_weight(&v, EntropyNormalization::LogTokens), 0.0);
        assert_eq!(entropy_weight(&verse("solo"), EntropyNormalization::LogTokens), 0.0);
    }

    #[test]
    fn distinct_tokens_weigh_one() {
        for n in [2usize, 3, 7, 64, 100] {
            let text: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
            let w = entropy_weight(&verse(&text.join(" ")), EntropyNormalization::LogTokens);
            assert!((w - 1.0).abs() < 1e-12, "{n}: {w}");
        }
    }

    #[test]
    fn literal_variant_divides_by_token_count() {
        let v = verse("a a b c");
        assert!((entropy_weight(&v, EntropyNormalization::Literal) - 1.5 / 4.0).abs() < 1e-12);
    }
}
