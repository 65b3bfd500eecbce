//! Text-side features: length, lexical richness, traditional readability
//! formulas and mean age of acquisition.

mod aoa;
mod richness;
mod syllables;
mod traditional;

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::session::{AoALexicon, Article, Level};

pub use aoa::{mean_aoa, AoaMean};
pub use richness::{lexical_richness, richness_from_counts, LexicalRichness};
pub use syllables::count_syllables;
pub use traditional::{
    coleman_liau_index, flesch_kincaid_grade, smog_grade, split_sentences, traditional_features, TraditionalFeatures,
    SMOG_SAMPLE_SENTENCES,
};

/// Lowercased word tokens. A token is a run of letters; a hyphen or
/// apostrophe between two letters keeps the word whole ("well-known",
/// "don't"). Digits and punctuation separate tokens and are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphabetic() {
            cur.extend(c.to_lowercase());
        } else if matches!(c, '-' | '\'' | '’')
            && !cur.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphabetic())
        {
            cur.push(if c == '’' { '\'' } else { c });
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Which count stands for "length" in the baseline feature set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthFeature {
    #[default]
    Words,
    Characters,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TextFeatures {
    pub n_tokens: usize,
    pub n_types: usize,
    pub n_chars: usize,
    pub richness: LexicalRichness,
    pub traditional: TraditionalFeatures,
    pub aoa_tokens: Option<AoaMean>,
    pub aoa_lemmas: Option<AoaMean>,
}

impl TextFeatures {
    pub fn length(&self, basis: LengthFeature) -> f64 {
        match basis {
            LengthFeature::Words => self.n_tokens as f64,
            LengthFeature::Characters => self.n_chars as f64,
        }
    }

    /// Length plus the five richness measures. A missing Uber index
    /// (every token distinct) is reported as NaN.
    pub fn baseline(&self, basis: LengthFeature) -> [f64; 6] {
        let r = &self.richness;
        [
            self.length(basis),
            r.ttr,
            r.root_ttr,
            r.corrected_ttr,
            r.bilog_ttr,
            r.uber.unwrap_or(f64::NAN),
        ]
    }

    pub const BASELINE_NAMES: [&'static str; 6] = ["length", "ttr", "root_ttr", "corrected_ttr", "bilog_ttr", "uber"];

    pub fn traditional_block(&self) -> [f64; 9] {
        let t = &self.traditional;
        [
            t.avg_chars_per_word,
            t.avg_syllables_per_word,
            t.avg_sentence_len,
            t.flesch_kincaid,
            t.coleman_liau,
            t.smog,
            t.n_sentences as f64,
            t.polysyllable_ratio,
            t.long_word_ratio,
        ]
    }

    pub const TRADITIONAL_NAMES: [&'static str; 9] = [
        "avg_chars_per_word",
        "avg_syllables_per_word",
        "avg_sentence_len",
        "flesch_kincaid",
        "coleman_liau",
        "smog",
        "n_sentences",
        "polysyllable_ratio",
        "long_word_ratio",
    ];
}

pub fn text_features(text: &str, lexicon: Option<&AoALexicon>) -> Result<TextFeatures> {
    let tokens = tokenize(text);
    let richness = lexical_richness(&tokens)?;
    let traditional = traditional_features(text)?;
    let (aoa_tokens, aoa_lemmas) = match lexicon {
        Some(lex) => (
            Some(mean_aoa(&tokens, lex, false)?),
            Some(mean_aoa(&tokens, lex, true)?),
        ),
        None => (None, None),
    };
    Ok(TextFeatures {
        n_tokens: tokens.len(),
        n_types: richness.n_types,
        n_chars: tokens.iter().map(|t| t.chars().count()).sum(),
        richness,
        traditional,
        aoa_tokens,
        aoa_lemmas,
    })
}

/// Features for one article, keyed like the corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct ArticleFeatures {
    pub article_id: String,
    pub level: Level,
    pub features: TextFeatures,
}

pub fn article_features(articles: &[Article], lexicon: Option<&AoALexicon>) -> Result<Vec<ArticleFeatures>> {
    articles
        .iter()
        .map(|a| {
            text_features(&a.body, lexicon)
                .map(|features| ArticleFeatures {
                    article_id: a.article_id.clone(),
                    level: a.level,
                    features,
                })
                .map_err(|e| Error::Corpus(format!("article `{}` ({}): {e}", a.article_id, a.level)))
        })
        .collect()
}

/// Per-article CSV of every text feature plus AoA coverage.
pub fn write_text_features_csv<W: Write>(writer: W, rows: &[ArticleFeatures]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::io("<text features csv>", std::io::Error::other(e));
    let mut header = vec!["article_id", "level", "n_tokens", "n_types", "n_chars"];
    header.extend(&TextFeatures::BASELINE_NAMES[1..]);
    header.extend(TextFeatures::TRADITIONAL_NAMES);
    header.extend([
        "smog_small_sample",
        "mean_aoa_tokens",
        "aoa_token_coverage",
        "mean_aoa_lemmas",
        "aoa_lemma_coverage",
    ]);
    w.write_record(&header).map_err(io)?;
    for row in rows {
        let f = &row.features;
        let mut rec = vec![
            row.article_id.clone(),
            row.level.to_string(),
            f.n_tokens.to_string(),
            f.n_types.to_string(),
            f.n_chars.to_string(),
        ];
        rec.extend(f.baseline(LengthFeature::Words)[1..].iter().map(|v| fmt_num(*v)));
        rec.extend(f.traditional_block().iter().map(|v| fmt_num(*v)));
        rec.push(f.traditional.smog_small_sample.to_string());
        for aoa in [f.aoa_tokens, f.aoa_lemmas] {
            match aoa {
                Some(a) => {
                    rec.push(fmt_num(a.mean));
                    rec.push(fmt_num(a.coverage));
                }
                None => rec.extend(["NA".to_string(), "NA".to_string()]),
            }
        }
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io("<text features csv>", e))
}

/// Shortest round-trip decimal, `NA` for NaN.
/// Shortest round-trip form; exponent notation for very small or large
/// magnitudes. NaN is written `NA`.
pub(crate) fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "NA".to_string()
    } else {
        format!("{v:?}")
    }
}
