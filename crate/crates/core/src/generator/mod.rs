//! Baseline n-gram verse generator and checkpoint suites.

mod checkpoints;
mod ngram;

pub use checkpoints::{
    baseline_checkpoint_suite, external_checkpoint_suite, load_checkpoint_verses,
    load_external_checkpoints, parse_checkpoint_name, score_verse, verse_seed, window_of,
    BaselineConfig, BaselineSuite, CheckpointPoint, ScoredVerse, CHECKPOINT_SPACING,
    LAST_CHECKPOINT, WINDOW_OFFSETS,
};
pub use ngram::{
    contains_sentinel, frame_verse, BackoffLevel, Distribution, GenerationMode, NGramModel,
    DEFAULT_MAX_TOKENS, END, LINE_BREAK, MAX_ORDER, START,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Provenance, Verse};
    use crate::Error;

    fn verse(id: &str, text: &str) -> Verse {
        Verse::from_text("x", id, text, Provenance::Authentic).unwrap()
    }

    #[test]
    fn order_out_of_range() {
        let v = [verse("a", "a b")];
        assert!(matches!(NGramModel::train(&v, 0), Err(Error::InvalidOrder(0))));
        assert!(matches!(NGramModel::train(&v, 10), Err(Error::InvalidOrder(10))));
        assert!(matches!(NGramModel::train(&[], 2), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn bigram_interior_is_deterministic() {
        let m = NGramModel::train(&[verse("a", "a b a b")], 2).unwrap();
        let after_a = m.next_token_distribution(&["a"]);
        assert_eq!(after_a.probability("b"), 1.0);
        // "b" is followed by "a" once and by the end sentinel once
        let after_b = m.next_token_distribution(&["<s>", "a", "b"]);
        assert_eq!(after_b.probability("a"), 0.5);
        assert_eq!(after_b.probability(END), 0.5);
    }

    #[test]
    fn unseen_context_falls_to_unigram() {
        let m = NGramModel::train(&[verse("a", "a b"), verse("c", "c b")], 2).unwrap();
        let d = m.next_token_distribution(&["z"]);
        assert_eq!(d.level, BackoffLevel::Unigram);
        let total: f64 = d.probabilities().iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unigram_matches_corpus_frequencies() {
        let m = NGramModel::train(&[verse("a", "a a b\nc")], 1).unwrap();
        let d = m.next_token_distribution(&["a", "b"]);
        assert_eq!(d.level, BackoffLevel::Unigram);
        // targets: a a b <lb> c </s>
        assert_eq!(d.probability("a"), 2.0 / 6.0);
        assert_eq!(d.probability(LINE_BREAK), 1.0 / 6.0);
        assert_eq!(d.probability(END), 1.0 / 6.0);
    }

    #[test]
    fn skip_level_keeps_oldest_position() {
        let m = NGramModel::train(&[verse("a", "x y t\nx q u")], 3).unwrap();
        let d = m.next_token_distribution(&["x", "zzz"]);
        assert_eq!(d.level, BackoffLevel::Context { visible: 1, skipped: 1 });
        assert_eq!(d.probability("t"), 0.5);
        assert_eq!(d.probability("u"), 0.5);
    }

    #[test]
    fn greedy_overfit_reproduces_single_verse() {
        let text = "we wander slowly through the night\na candle gives a tiny light\nthe night is long";
        let v = verse("a", text);
        let m = NGramModel::train(std::slice::from_ref(&v), 9).unwrap();
        let g = m
            .generate_verse("x", "g", 9, 0, 1100, GenerationMode::Greedy)
            .unwrap();
        assert_eq!(g.lines, v.lines);
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let corpus = [
            verse("a", "one two three\nfour five six"),
            verse("b", "one three five\nsix two four"),
        ];
        let m = NGramModel::train(&corpus, 2).unwrap();
        let a = m.generate_verse("x", "g", 2, 7, 50, GenerationMode::Sample).unwrap();
        let b = m.generate_verse("x", "g", 2, 7, 50, GenerationMode::Sample).unwrap();
        assert_eq!(a, b);
        assert!(!contains_sentinel(&a));
        assert!(a.token_count <= 50);
    }

    #[test]
    fn zero_max_tokens_is_an_error() {
        let m = NGramModel::train(&[verse("a", "a b")], 2).unwrap();
        assert!(matches!(
            m.generate_verse("x", "g", 2, 0, 0, GenerationMode::Greedy),
            Err(Error::InvalidMaxTokens)
        ));
    }

    #[test]
    fn checkpoint_names_and_windows() {
        assert_eq!(parse_checkpoint_name("iter_2400.txt"), Some(2400));
        assert_eq!(parse_checkpoint_name("iter_x.txt"), None);
        assert_eq!(window_of(999), None);
        assert_eq!(window_of(1600), Some(2000));
        assert_eq!(window_of(2400), Some(2000));
        assert_eq!(window_of(2500), None);
        assert_eq!(window_of(0), Some(0));
        assert_eq!(window_of(400), Some(0));
        assert_eq!(window_of(16400), Some(16000));
        assert_eq!(window_of(17000), None);
        assert_eq!(window_of(1650), None);
    }
}
