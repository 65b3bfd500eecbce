use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};

/// Lexical richness of a token sequence, a function of the type count `T`
/// and token count `N` only. Logarithms are natural.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LexicalRichness {
    pub n_tokens: usize,
    pub n_types: usize,
    /// T / N
    pub ttr: f64,
    /// T / √N
    pub root_ttr: f64,
    /// T / √(2N)
    pub corrected_ttr: f64,
    /// ln T / ln N
    pub bilog_ttr: f64,
    /// (ln T)² / ln(N / T); undefined when every token is distinct.
    pub uber: Option<f64>,
}

pub fn lexical_richness<S: AsRef<str>>(tokens: &[S]) -> Result<LexicalRichness> {
    let types: HashSet<&str> = tokens.iter().map(AsRef::as_ref).collect();
    richness_from_counts(types.len(), tokens.len())
}

pub fn richness_from_counts(n_types: usize, n_tokens: usize) -> Result<LexicalRichness> {
    if n_tokens < 2 {
        return Err(Error::TooShort(format!("{n_tokens} tokens, need at least 2")));
    }
    if n_types < 2 {
        return Err(Error::TooShort(format!("{n_types} word types, need at least 2")));
    }
    if n_types > n_tokens {
        return Err(Error::InvalidArgument(format!(
            "{n_types} types exceed {n_tokens} tokens"
        )));
    }
    let t = n_types as f64;
    let n = n_tokens as f64;
    let uber = (n_types < n_tokens).then(|| t.ln().powi(2) / (n / t).ln());
    Ok(LexicalRichness {
        n_tokens,
        n_types,
        ttr: t / n,
        root_ttr: t / n.sqrt(),
        corrected_ttr: t / (2.0 * n).sqrt(),
        bilog_ttr: t.ln() / n.ln(),
        uber,
    })
}
