//! Lyric ingestion: cleaning raw song files into tokenized verses, and the
//! per-artist dataset statistics.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Verses shorter than this are treated as leftover dialogue or chorus.
pub const MIN_VERSE_TOKENS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Authentic,
    Generated { checkpoint: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verse {
    pub artist_id: String,
    pub verse_id: String,
    pub lines: Vec<Vec<String>>,
    pub provenance: Provenance,
    pub token_count: usize,
}

impl Verse {
    /// Builds a verse, dropping empty lines. Returns `None` when no tokens remain.
    pub fn new(
        artist_id: impl Into<String>,
        verse_id: impl Into<String>,
        lines: Vec<Vec<String>>,
        provenance: Provenance,
    ) -> Option<Self> {
        let lines: Vec<Vec<String>> = lines.into_iter().filter(|l| !l.is_empty()).collect();
        let token_count = lines.iter().map(Vec::len).sum();
        if token_count == 0 {
            return None;
        }
        Some(Verse {
            artist_id: artist_id.into(),
            verse_id: verse_id.into(),
            lines,
            provenance,
            token_count,
        })
    }

    /// Tokenizes each line of `text` with [`tokenize`].
    pub fn from_text(
        artist_id: impl Into<String>,
        verse_id: impl Into<String>,
        text: &str,
        provenance: Provenance,
    ) -> Option<Self> {
        let lines = text.lines().map(tokenize).collect();
        Verse::new(artist_id, verse_id, lines, provenance)
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.lines.iter().flatten().map(String::as_str)
    }

    pub fn is_generated(&self) -> bool {
        matches!(self.provenance, Provenance::Generated { .. })
    }

    /// Lines joined by single spaces, one per row.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Copy)]
enum CharClass {
    Space,
    Word,
    Punct,
}

fn classify(c: char) -> CharClass {
    if c.is_whitespace() {
        CharClass::Space
    } else if c.is_alphanumeric() || c == '\'' || c == '\u{2019}' {
        CharClass::Word
    } else {
        CharClass::Punct
    }
}

/// Lowercases and splits on whitespace, detaching punctuation runs into their
/// own tokens. Apostrophes stay inside words ("don't", "runnin'").
pub fn tokenize(line: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut class = CharClass::Space;
    for c in line.chars() {
        let c = if c == '\u{2019}' { '\'' } else { c };
        let next = classify(c);
        if next != class && !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
        class = next;
        if next != CharClass::Space {
            current.extend(c.to_lowercase());
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Heuristic cleaning rules. Every pattern is a case-insensitive regex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CleaningRules {
    /// Lines dropped as song metadata (headers, credits).
    pub metadata: Vec<String>,
    /// Lines dropped as chorus markers or chorus lines.
    pub chorus: Vec<String>,
    /// When set, a chorus marker also drops the rest of its stanza.
    pub chorus_drops_stanza: bool,
    /// Substrings removed from lines, e.g. "(x2)".
    pub repetition_markup: Vec<String>,
    /// Lines that end the current verse (in addition to blank lines). The line itself is dropped.
    pub verse_markers: Vec<String>,
    pub min_tokens: usize,
}

impl Default for CleaningRules {
    fn default() -> Self {
        CleaningRules {
            metadata: vec![
                r"^\s*(artist|album|song|title|typed by|transcribed by|lyrics)\s*:".into(),
                r"^\s*\{.*\}\s*$".into(),
            ],
            chorus: vec![r"^\s*[\[\(\{]?\s*(chorus|hook|refrain)\b".into()],
            chorus_drops_stanza: false,
            repetition_markup: vec![
                r"[\(\[\{]\s*(x\s*\d+|\d+\s*x|repeat(\s*\d+\s*x?)?)\s*[\)\]\}]".into(),
                r"\s+x\d+\s*$".into(),
            ],
            verse_markers: vec![r"^\s*\[\s*(verse|intro|outro|bridge)\b[^\]]*\]\s*$".into()],
            min_tokens: MIN_VERSE_TOKENS,
        }
    }
}

impl CleaningRules {
    pub fn compile(&self) -> Result<CompiledRules> {
        fn build(patterns: &[String]) -> Result<Vec<Regex>> {
            patterns
                .iter()
                .map(|p| {
                    RegexBuilder::new(p)
                        .case_insensitive(true)
                        .build()
                        .map_err(|source| Error::Rule {
                            pattern: p.clone(),
                            source,
                        })
                })
                .collect()
        }
        Ok(CompiledRules {
            metadata: build(&self.metadata)?,
            chorus: build(&self.chorus)?,
            chorus_drops_stanza: self.chorus_drops_stanza,
            repetition_markup: build(&self.repetition_markup)?,
            verse_markers: build(&self.verse_markers)?,
            min_tokens: self.min_tokens,
        })
    }
}

#[derive(Debug, Clone)]
pub struct CompiledRules {
    metadata: Vec<Regex>,
    chorus: Vec<Regex>,
    chorus_drops_stanza: bool,
    repetition_markup: Vec<Regex>,
    verse_markers: Vec<Regex>,
    min_tokens: usize,
}

impl CompiledRules {
    pub fn min_tokens(&self) -> usize {
        self.min_tokens
    }
}

fn any_match(rules: &[Regex], line: &str) -> bool {
    rules.iter().any(|r| r.is_match(line))
}

/// Splits one song into cleaned verses. Verses below the length floor are dropped.
pub fn parse_lyrics(
    raw_text: &str,
    rules: &CompiledRules,
    artist_id: &str,
    song_id: &str,
) -> Vec<Verse> {
    let mut stanzas: Vec<Vec<Vec<String>>> = Vec::new();
    let mut current: Vec<Vec<String>> = Vec::new();
    let mut skipping_chorus = false;

    let mut close = |current: &mut Vec<Vec<String>>| {
        if !current.is_empty() {
            stanzas.push(std::mem::take(current));
        }
    };

    for line in raw_text.lines() {
        if line.trim().is_empty() || any_match(&rules.verse_markers, line) {
            close(&mut current);
            skipping_chorus = false;
            continue;
        }
        if skipping_chorus || any_match(&rules.metadata, line) {
            continue;
        }
        if any_match(&rules.chorus, line) {
            skipping_chorus = rules.chorus_drops_stanza;
            continue;
        }
        let mut cleaned = line.to_string();
        for markup in &rules.repetition_markup {
            cleaned = markup.replace_all(&cleaned, " ").into_owned();
        }
        let tokens = tokenize(&cleaned);
        if !tokens.is_empty() {
            current.push(tokens);
        }
    }
    close(&mut current);

    stanzas
        .into_iter()
        .enumerate()
        .filter_map(|(k, lines)| {
            Verse::new(
                artist_id,
                format!("{song_id}-{k:03}"),
                lines,
                Provenance::Authentic,
            )
        })
        .filter(|v| v.token_count >= rules.min_tokens)
        .collect()
}

/// Like [`parse_lyrics`] for raw bytes; fails on invalid UTF-8.
pub fn parse_lyrics_bytes(
    raw: &[u8],
    rules: &CompiledRules,
    artist_id: &str,
    song_id: &str,
) -> Result<Vec<Verse>> {
    let text = std::str::from_utf8(raw)?;
    Ok(parse_lyrics(text, rules, artist_id, song_id))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtistCorpus {
    pub artist_id: String,
    pub verses: Vec<Verse>,
    pub vocabulary: BTreeSet<String>,
}

impl ArtistCorpus {
    pub fn new(artist_id: impl Into<String>, verses: Vec<Verse>) -> Result<Self> {
        let mut seen = HashSet::new();
        for v in &verses {
            if !seen.insert(v.verse_id.as_str()) {
                return Err(Error::DuplicateVerse(v.verse_id.clone()));
            }
        }
        let vocabulary = verses
            .iter()
            .flat_map(|v| v.tokens().map(str::to_string))
            .collect();
        Ok(ArtistCorpus {
            artist_id: artist_id.into(),
            verses,
            vocabulary,
        })
    }

    pub fn total_tokens(&self) -> usize {
        self.verses.iter().map(|v| v.token_count).sum()
    }

    /// Reads every `*.txt` song file in `dir` (sorted by name) as one artist.
    pub fn load_dir(dir: &Path, artist_id: &str, rules: &CompiledRules) -> Result<Self> {
        let mut files: Vec<_> = fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "txt"))
            .collect();
        files.sort();
        let mut verses = Vec::new();
        for path in files {
            let raw = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            let song_id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            verses.extend(parse_lyrics_bytes(
                &raw,
                rules,
                artist_id,
                &format!("{artist_id}/{song_id}"),
            )?);
        }
        ArtistCorpus::new(artist_id, verses)
    }

    pub fn manifest(&self) -> CorpusManifest {
        CorpusManifest {
            artist_id: self.artist_id.clone(),
            verses: self
                .verses
                .iter()
                .map(|v| ManifestVerse {
                    verse_id: v.verse_id.clone(),
                    lines: v.lines.clone(),
                    token_count: v.token_count,
                })
                .collect(),
        }
    }

    pub fn from_manifest(manifest: CorpusManifest) -> Result<Self> {
        let artist = manifest.artist_id;
        let verses = manifest
            .verses
            .into_iter()
            .filter_map(|v| Verse::new(artist.clone(), v.verse_id, v.lines, Provenance::Authentic))
            .collect();
        ArtistCorpus::new(artist, verses)
    }
}

/// On-disk JSON form of one artist's cleaned corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub artist_id: String,
    pub verses: Vec<ManifestVerse>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestVerse {
    pub verse_id: String,
    pub lines: Vec<Vec<String>>,
    pub token_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub verse_count: usize,
    pub unique_vocab: usize,
    /// 100 × unique tokens / total tokens.
    pub vocab_richness: f64,
    pub avg_len: f64,
    /// Population standard deviation of verse lengths.
    pub stdev_len: f64,
    pub max_len: usize,
}

pub const STATS_HEADER: [&str; 7] = [
    "artist",
    "verses",
    "unique_vocab",
    "vocab_richness",
    "avg_len",
    "stdev_len",
    "max_len",
];

pub fn corpus_stats(corpus: &ArtistCorpus) -> Result<CorpusStats> {
    if corpus.verses.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let lens: Vec<f64> = corpus.verses.iter().map(|v| v.token_count as f64).collect();
    let n = lens.len() as f64;
    let total: f64 = lens.iter().sum();
    let avg = total / n;
    let var = lens.iter().map(|l| (l - avg).powi(2)).sum::<f64>() / n;
    let unique = corpus.vocabulary.len();
    Ok(CorpusStats {
        verse_count: corpus.verses.len(),
        unique_vocab: unique,
        vocab_richness: 100.0 * unique as f64 / total,
        avg_len: avg,
        stdev_len: var.sqrt(),
        max_len: corpus.verses.iter().map(|v| v.token_count).max().unwrap_or(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(n: usize, prefix: &str) -> String {
        (0..n)
            .map(|i| format!("{prefix}{i}"))
            .collect::<Vec<_>>()
            .chunks(5)
            .map(|c| c.join(" "))
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn rules() -> CompiledRules {
        CleaningRules::default().compile().unwrap()
    }

    #[test]
    fn tokenizer_detaches_punctuation_and_keeps_apostrophes() {
        assert_eq!(
            tokenize("Don't STOP, runnin' -- now!"),
            vec!["don't", "stop", ",", "runnin'", "--", "now", "!"]
        );
        assert_eq!(tokenize("   "), Vec::<String>::new());
    }

    #[test]
    fn two_stanzas_make_two_verses() {
        let text = format!("{}\n\n{}\n", words(25, "a"), words(25, "b"));
        let verses = parse_lyrics(&text, &rules(), "x", "song");
        assert_eq!(verses.len(), 2);
        assert_eq!(verses[0].token_count, 25);
        assert_eq!(verses[1].verse_id, "song-001");
    }

    #[test]
    fn short_stanza_is_dropped() {
        let verses = parse_lyrics(&words(19, "a"), &rules(), "x", "song");
        assert!(verses.is_empty());
        assert_eq!(parse_lyrics(&words(20, "a"), &rules(), "x", "song").len(), 1);
    }

    #[test]
    fn chorus_and_metadata_lines_are_removed() {
        let text = format!(
            "Artist: Somebody\nSong: Something\n\n{}\n[Chorus: everybody]\n{}\n",
            words(10, "a"),
            words(15, "b")
        );
        let verses = parse_lyrics(&text, &rules(), "x", "song");
        assert_eq!(verses.len(), 1);
        assert!(verses[0].tokens().all(|t| t != "chorus" && t != "everybody"));
        assert_eq!(verses[0].token_count, 25);
    }

    #[test]
    fn chorus_stanza_dropped_when_configured() {
        let mut r = CleaningRules::default();
        r.chorus_drops_stanza = true;
        let text = format!("[Hook]\n{}\n\n{}\n", words(30, "h"), words(22, "v"));
        let verses = parse_lyrics(&text, &r.compile().unwrap(), "x", "s");
        assert_eq!(verses.len(), 1);
        assert!(verses[0].tokens().all(|t| t.starts_with('v')));
    }

    #[test]
    fn repetition_markup_and_verse_markers() {
        let text = format!(
            "[Verse 1: Somebody]\n{} (x2)\n{}\n[Verse 2]\n{}\n",
            words(5, "a"),
            words(16, "b"),
            words(21, "c")
        );
        let verses = parse_lyrics(&text, &rules(), "x", "s");
        assert_eq!(verses.len(), 2);
        assert_eq!(verses[0].token_count, 21);
        assert!(verses[0].tokens().all(|t| t != "x2" && t != "("));
    }

    #[test]
    fn invalid_utf8_is_a_decode_error() {
        let err = parse_lyrics_bytes(&[0x66, 0xff, 0xfe], &rules(), "x", "s").unwrap_err();
        assert!(matches!(err, Error::Decode(_)));
        assert!(parse_lyrics_bytes(b"", &rules(), "x", "s").unwrap().is_empty());
    }

    #[test]
    fn bad_rule_is_reported() {
        let mut r = CleaningRules::default();
        r.chorus.push("(".into());
        assert!(matches!(r.compile(), Err(Error::Rule { .. })));
    }

    #[test]
    fn stats_for_repeated_token_verse() {
        let v = Verse::from_text("x", "v", &vec!["a"; 20].join(" "), Provenance::Authentic).unwrap();
        let stats = corpus_stats(&ArtistCorpus::new("x", vec![v]).unwrap()).unwrap();
        assert_eq!(stats.unique_vocab, 1);
        assert!((stats.vocab_richness - 5.0).abs() < 1e-12);
    }

    #[test]
    fn stats_lengths() {
        let a = Verse::from_text("x", "a", &words(20, "a"), Provenance::Authentic).unwrap();
        let b = Verse::from_text("x", "b", &words(40, "b"), Provenance::Authentic).unwrap();
        let stats = corpus_stats(&ArtistCorpus::new("x", vec![a, b]).unwrap()).unwrap();
        assert_eq!(stats.avg_len, 30.0);
        assert_eq!(stats.max_len, 40);
        assert_eq!(stats.stdev_len, 10.0);
        assert_eq!(stats.verse_count, 2);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let c = ArtistCorpus::new("x", vec![]).unwrap();
        assert!(matches!(corpus_stats(&c), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let a = Verse::from_text("x", "a", "one two", Provenance::Authentic).unwrap();
        assert!(matches!(
            ArtistCorpus::new("x", vec![a.clone(), a]),
            Err(Error::DuplicateVerse(_))
        ));
    }

    // DMX row: 819 verses, 5593 unique tokens, average length 125.
    #[test]
    fn richness_direction_matches_dataset_table() {
        let total: f64 = 819.0 * 125.0;
        let ours = 100.0 * 5593.0 / total;
        let caption_literal = total / 5593.0;
        assert!((ours - 5.3).abs() < 0.25, "{ours}");
        assert!((caption_literal - 5.3).abs() > 10.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn stanza() -> impl Strategy<Value = Vec<String>> {
            prop::collection::vec("[a-z']{1,6}( [a-z,.!]{1,4}){0,7}", 1..8)
        }

        proptest! {
            #[test]
            fn filtering_is_idempotent(stanzas in prop::collection::vec(stanza(), 0..6)) {
                let text = stanzas.iter().map(|s| s.join("\n")).collect::<Vec<_>>().join("\n\n");
                let r = rules();
                let verses = parse_lyrics(&text, &r, "x", "s");
                let refiltered: Vec<_> = verses.iter().filter(|v| v.token_count >= MIN_VERSE_TOKENS).cloned().collect();
                prop_assert_eq!(&refiltered, &verses);
                for v in &verses {
                    let sum: usize = v.lines.iter().map(Vec::len).sum();
                    prop_assert_eq!(sum, v.token_count);
                    prop_assert!(!v.lines.is_empty());
                }
            }

            #[test]
            fn tokens_survive_rejoining(line in "[A-Za-z',.!? -]{0,60}") {
                let tokens = tokenize(&line);
                prop_assert_eq!(tokenize(&tokens.join(" ")), tokens);
            }

            #[test]
            fn unique_vocab_matches_brute_force(stanzas in prop::collection::vec(prop::collection::vec("[a-d]{1,2}", 20..40), 1..5)) {
                let verses: Vec<Verse> = stanzas.iter().enumerate()
                    .map(|(i, toks)| Verse::from_text("x", format!("v{i}"), &toks.join(" "), Provenance::Authentic).unwrap())
                    .collect();
                let mut brute: Vec<&String> = stanzas.iter().flatten().collect();
                brute.sort();
                brute.dedup();
                let corpus = ArtistCorpus::new("x", verses).unwrap();
                prop_assert_eq!(corpus_stats(&corpus).unwrap().unique_vocab, brute.len());
            }
        }
    }
}
