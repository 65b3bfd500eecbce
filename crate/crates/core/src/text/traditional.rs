//! Classic readability formulas: Flesch-Kincaid grade, Coleman-Liau index
//! and SMOG grade, plus the surface averages they are built from.

use serde::Serialize;

use super::syllables::count_syllables;
use super::tokenize;
use crate::error::{Error, Result};

/// SMOG's standard form is defined over a 30-sentence sample.
pub const SMOG_SAMPLE_SENTENCES: usize = 30;

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "st", "jr", "sr", "vs", "etc", "e.g", "i.e", "u.s", "u.k", "inc", "ltd", "co",
    "corp", "no", "mt", "gen", "gov", "sen", "rep", "rev", "capt", "col", "lt", "sgt", "jan", "feb", "mar", "apr",
    "aug", "sept", "sep", "oct", "nov", "dec", "fig", "approx", "dept", "est", "ft", "a.m", "p.m",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraditionalFeatures {
    pub n_sentences: usize,
    /// Non-whitespace characters of the words, punctuation included, per word.
    pub avg_chars_per_word: f64,
    pub avg_syllables_per_word: f64,
    pub avg_sentence_len: f64,
    pub flesch_kincaid: f64,
    pub coleman_liau: f64,
    pub smog: f64,
    /// Fewer than 30 sentences: SMOG was scaled up from a short sample.
    pub smog_small_sample: bool,
    /// Words of three or more syllables, per word.
    pub polysyllable_ratio: f64,
    /// Words longer than six letters, per word.
    pub long_word_ratio: f64,
}

/// Splits on `.`, `?` or `!` (plus any closing quotes or brackets) followed
/// by whitespace and an uppercase letter, digit or opening quote, and on
/// blank lines. Known abbreviations and single-letter initials do not end a
/// sentence. Segments without words are dropped.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    fn push<'a>(out: &mut Vec<&'a str>, s: &'a str) {
        if !tokenize(s).is_empty() {
            out.push(s.trim());
        }
    }
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c == '\n' {
            // blank line
            let mut j = i + 1;
            while j < chars.len() && chars[j].1 != '\n' && chars[j].1.is_whitespace() {
                j += 1;
            }
            if j < chars.len() && chars[j].1 == '\n' {
                push(&mut out, &text[start..pos]);
                while j < chars.len() && chars[j].1.is_whitespace() {
                    j += 1;
                }
                start = chars.get(j).map(|c| c.0).unwrap_or(text.len());
                i = j;
                continue;
            }
        }
        if matches!(c, '.' | '?' | '!') {
            let mut j = i + 1;
            while j < chars.len() && matches!(chars[j].1, '.' | '?' | '!' | '"' | '\'' | '”' | '’' | ')' | ']') {
                j += 1;
            }
            let mut k = j;
            while k < chars.len() && chars[k].1.is_whitespace() {
                k += 1;
            }
            let followed = k > j && k < chars.len() && {
                let mut n = chars[k].1;
                if matches!(n, '"' | '“' | '‘' | '\'' | '(') {
                    n = chars.get(k + 1).map(|c| c.1).unwrap_or(' ');
                }
                n.is_uppercase() || n.is_ascii_digit()
            };
            if followed && !(c == '.' && is_abbreviation(text, pos)) {
                let end = chars.get(j).map(|c| c.0).unwrap_or(text.len());
                push(&mut out, &text[start..end]);
                start = chars[k].0;
                i = k;
                continue;
            }
            i = j;
            continue;
        }
        i += 1;
    }
    if start < text.len() {
        push(&mut out, &text[start..]);
    }
    out
}

fn is_abbreviation(text: &str, dot: usize) -> bool {
    let before = &text[..dot];
    let word_start = before
        .rfind(|c: char| c.is_whitespace() || c == '(' || c == '"')
        .map(|p| p + 1)
        .unwrap_or(0);
    let word = before[word_start..].to_lowercase();
    let bare = word.trim_start_matches(['"', '\'', '(', '“']);
    if bare.chars().count() == 1 && bare.chars().all(|c| c.is_alphabetic()) {
        return true;
    }
    ABBREVIATIONS.contains(&bare)
}

pub fn flesch_kincaid_grade(words: f64, sentences: f64, syllables: f64) -> f64 {
    0.39 * (words / sentences) + 11.8 * (syllables / words) - 15.59
}

/// `letters` and `sentences` are counts; both are rescaled per 100 words.
pub fn coleman_liau_index(words: f64, sentences: f64, letters: f64) -> f64 {
    let l = letters / words * 100.0;
    let s = sentences / words * 100.0;
    0.0588 * l - 0.296 * s - 15.8
}

pub fn smog_grade(polysyllables: f64, sentences: f64) -> f64 {
    1.0430 * (polysyllables * SMOG_SAMPLE_SENTENCES as f64 / sentences).sqrt() + 3.1291
}

pub fn traditional_features(text: &str) -> Result<TraditionalFeatures> {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return Err(Error::TooShort("text has no words".into()));
    }
    let sentences = split_sentences(text);
    let n_sentences = sentences.len().max(1);

    let mut syllables = 0usize;
    let mut polysyllables = 0usize;
    let mut letters = 0usize;
    let mut long_words = 0usize;
    for t in &tokens {
        let s = count_syllables(t)?;
        syllables += s;
        if s >= 3 {
            polysyllables += 1;
        }
        let n_letters = t.chars().filter(|c| c.is_alphabetic()).count();
        letters += n_letters;
        if n_letters > 6 {
            long_words += 1;
        }
    }
    let chars: usize = text
        .split_whitespace()
        .filter(|w| w.chars().any(char::is_alphabetic))
        .map(|w| w.chars().count())
        .sum();

    let w = tokens.len() as f64;
    let s = n_sentences as f64;
    Ok(TraditionalFeatures {
        n_sentences,
        avg_chars_per_word: chars as f64 / w,
        avg_syllables_per_word: syllables as f64 / w,
        avg_sentence_len: w / s,
        flesch_kincaid: flesch_kincaid_grade(w, s, syllables as f64),
        coleman_liau: coleman_liau_index(w, s, letters as f64),
        smog: smog_grade(polysyllables as f64, s),
        smog_small_sample: n_sentences < SMOG_SAMPLE_SENTENCES,
        polysyllable_ratio: polysyllables as f64 / w,
        long_word_ratio: long_words as f64 / w,
    })
}
