//! Rhyme density from phonemic transcription, down-weighted by token entropy.

mod detect;
mod dict;
mod entropy;

pub use detect::{
    detect_rhymes, syllables_of, weighted_rhyme_density, CodaMatch, PlacedSyllable, RhymeAnalysis,
    RhymePair, RhymeParams,
};
pub use dict::{
    fallback_phones, is_vowel, pronounce, strip_stress, syllabify, Pronunciation,
    PronunciationSource, PronouncingDictionary, Syllable,
};
pub use entropy::{entropy_bits, entropy_weight, EntropyNormalization};

const BUNDLED_DICT: &str = include_str!("../../data/cmudict-mini.dict");

impl PronouncingDictionary {
    /// Small CMU dictionary subset covering the bundled sample corpus.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_DICT)
    }
}
