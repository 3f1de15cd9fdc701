//! ARPAbet pronouncing dictionary and syllabification.
//!
//! The dictionary file format is the CMU one: `WORD  PH1 PH2 ...`, one entry
//! per line, vowels carrying a stress digit (`AE1`). Variants such as
//! `WORD(2)` are accepted and ignored in favour of the first entry. Lines
//! starting with `;;;` and anything after `#` are comments.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const VOWELS: [&str; 15] = [
    "AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER", "EY", "IH", "IY", "OW", "OY", "UH", "UW",
];

pub fn is_vowel(phone: &str) -> bool {
    VOWELS.contains(&strip_stress(phone).0)
}

/// Splits `AE1` into (`AE`, Some(1)).
pub fn strip_stress(phone: &str) -> (&str, Option<u8>) {
    match phone.as_bytes().last() {
        Some(d @ b'0'..=b'2') => (&phone[..phone.len() - 1], Some(d - b'0')),
        _ => (phone, None),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Syllable {
    pub onset: Vec<String>,
    /// Vowel phone without stress digit.
    pub nucleus: String,
    /// 0 unstressed, 1 primary, 2 secondary.
    pub stress: u8,
    pub coda: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PronunciationSource {
    Dictionary,
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pronunciation {
    pub token: String,
    pub syllables: Vec<Syllable>,
    pub source: PronunciationSource,
}

/// Groups a phone string into syllables. Each vowel is a nucleus; a single
/// intervocalic consonant opens the next syllable, longer clusters give their
/// last consonant to the next onset and the rest to the previous coda.
pub fn syllabify<S: AsRef<str>>(phones: &[S]) -> Vec<Syllable> {
    let vowel_at: Vec<usize> = phones
        .iter()
        .enumerate()
        .filter(|(_, p)| is_vowel(p.as_ref()))
        .map(|(i, _)| i)
        .collect();
    let mut out = Vec::with_capacity(vowel_at.len());
    for (k, &v) in vowel_at.iter().enumerate() {
        let (nucleus, stress) = strip_stress(phones[v].as_ref());
        let onset_start = if k == 0 {
            0
        } else {
            let prev = vowel_at[k - 1];
            let cluster = v - prev - 1;
            if cluster == 0 {
                v
            } else {
                v - 1
            }
        };
        let coda_end = match vowel_at.get(k + 1) {
            None => phones.len(),
            Some(&next) => {
                let cluster = next - v - 1;
                if cluster <= 1 {
                    v + 1
                } else {
                    next - 1
                }
            }
        };
        out.push(Syllable {
            onset: phones[onset_start..v]
                .iter()
                .map(|p| p.as_ref().to_string())
                .collect(),
            nucleus: nucleus.to_string(),
            stress: stress.unwrap_or(1),
            coda: phones[v + 1..coda_end]
                .iter()
                .map(|p| p.as_ref().to_string())
                .collect(),
        });
    }
    out
}

#[derive(Debug, Clone, Default)]
pub struct PronouncingDictionary {
    entries: HashMap<String, Vec<String>>,
}

impl PronouncingDictionary {
    pub fn parse(text: &str) -> Self {
        let mut entries: HashMap<String, Vec<String>> = HashMap::new();
        for line in text.lines() {
            if line.starts_with(";;;") {
                continue;
            }
            let line = line.split('#').next().unwrap_or_default();
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let phones: Vec<String> = fields.map(str::to_string).collect();
            if phones.is_empty() {
                continue;
            }
            let base = match word.find('(') {
                Some(i) if word.ends_with(')') => &word[..i],
                _ => word,
            };
            entries.entry(base.to_lowercase()).or_insert(phones);
        }
        PronouncingDictionary { entries }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn phones(&self, word: &str) -> Option<&[String]> {
        self.entries.get(word).map(Vec::as_slice)
    }

    fn lookup(&self, token: &str) -> Option<&[String]> {
        if let Some(p) = self.phones(token) {
            return Some(p);
        }
        let trimmed = token.trim_matches('\'');
        if let Some(p) = self.phones(trimmed) {
            return Some(p);
        }
        if let Some(stem) = token.strip_suffix("in'") {
            return self.phones(&format!("{stem}ing"));
        }
        None
    }
}

/// Dictionary pronunciation if present, else the orthographic fallback.
/// `None` for tokens without letters (punctuation, numbers).
pub fn pronounce(token: &str, dict: &PronouncingDictionary) -> Option<Pronunciation> {
    if !token.chars().any(char::is_alphabetic) {
        return None;
    }
    let lower = token.to_lowercase();
    if let Some(phones) = dict.lookup(&lower) {
        let syllables = syllabify(phones);
        if !syllables.is_empty() {
            return Some(Pronunciation {
                token: token.to_string(),
                syllables,
                source: PronunciationSource::Dictionary,
            });
        }
    }
    let syllables = syllabify(&fallback_phones(&lower));
    if syllables.is_empty() {
        return None;
    }
    Some(Pronunciation {
        token: token.to_string(),
        syllables,
        source: PronunciationSource::Fallback,
    })
}

fn vowel_group_phone(group: &str) -> &'static str {
    match group {
        "ee" | "ea" | "ie" | "ey" | "y" => "IY",
        "oo" | "ue" | "ui" => "UW",
        "ou" => "AW",
        "oa" | "oe" => "OW",
        "ai" | "ay" | "ei" => "EY",
        "oi" | "oy" => "OY",
        "au" => "AO",
        _ => match group.chars().last() {
            Some('a') => "AE",
            Some('e') => "EH",
            Some('i') => "IH",
            Some('o') => "AA",
            Some('u') => "AH",
            _ => "IY",
        },
    }
}

fn consonant_phones(cluster: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = cluster.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        let digraph = match (c, next) {
            ('s', Some('h')) => Some(&["SH"][..]),
            ('c', Some('h')) => Some(&["CH"][..]),
            ('t', Some('h')) => Some(&["TH"][..]),
            ('p', Some('h')) => Some(&["F"][..]),
            ('w', Some('h')) => Some(&["W"][..]),
            ('c', Some('k')) => Some(&["K"][..]),
            ('n', Some('g')) => Some(&["NG"][..]),
            ('g', Some('h')) => Some(&[][..]),
            _ => None,
        };
        if let Some(phones) = digraph {
            out.extend(phones.iter().map(|p| p.to_string()));
            i += 2;
            continue;
        }
        if next == Some(c) {
            i += 1;
            continue;
        }
        let phones: &[&str] = match c {
            'b' => &["B"],
            'c' | 'k' | 'q' => &["K"],
            'd' => &["D"],
            'f' => &["F"],
            'g' => &["G"],
            'h' => &["HH"],
            'j' => &["JH"],
            'l' => &["L"],
            'm' => &["M"],
            'n' => &["N"],
            'p' => &["P"],
            'r' => &["R"],
            's' => &["S"],
            't' => &["T"],
            'v' => &["V"],
            'w' => &["W"],
            'x' => &["K", "S"],
            'y' => &["Y"],
            'z' => &["Z"],
            _ => &[],
        };
        out.extend(phones.iter().map(|p| p.to_string()));
        i += 1;
    }
}

/// Orthographic grapheme-to-phoneme guess: every maximal vowel-letter group
/// is one syllable nucleus, and the last group carries the stress.
pub fn fallback_phones(word: &str) -> Vec<String> {
    let letters: Vec<char> = word
        .chars()
        .filter(|c| c.is_ascii_alphabetic())
        .map(|c| c.to_ascii_lowercase())
        .collect();
    let is_vowel_letter = |i: usize| -> bool {
        match letters[i] {
            'a' | 'e' | 'i' | 'o' | 'u' => true,
            // word-initial y before a vowel is a consonant
            'y' => !(i == 0 && letters.len() > 1 && "aeiou".contains(letters[1])),
            _ => false,
        }
    };
    let mut runs: Vec<(bool, String)> = Vec::new();
    for i in 0..letters.len() {
        let v = is_vowel_letter(i);
        match runs.last_mut() {
            Some((kind, s)) if *kind == v => s.push(letters[i]),
            _ => runs.push((v, letters[i].to_string())),
        }
    }
    let groups = runs.iter().filter(|(v, _)| *v).count();
    let mut phones = Vec::new();
    let mut seen = 0;
    for (vowel, s) in &runs {
        if *vowel {
            seen += 1;
            let stress = if seen == groups { '1' } else { '0' };
            phones.push(format!("{}{}", vowel_group_phone(s), stress));
        } else {
            consonant_phones(s, &mut phones);
        }
    }
    phones
}
