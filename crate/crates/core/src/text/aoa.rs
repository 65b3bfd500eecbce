use serde::Serialize;

use crate::error::{Error, Result};
use crate::session::AoALexicon;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AoaMean {
    /// Token-weighted mean rating over covered tokens, in years.
    pub mean: f64,
    /// Covered tokens / all tokens.
    pub coverage: f64,
}

/// Mean age of acquisition over the tokens the lexicon covers. With
/// `use_lemmas`, each token is first mapped to its lemma.
pub fn mean_aoa<S: AsRef<str>>(tokens: &[S], lexicon: &AoALexicon, use_lemmas: bool) -> Result<AoaMean> {
    let mut sum = 0.0;
    let mut matched = 0usize;
    for t in tokens {
        let t = t.as_ref();
        let form = if use_lemmas { lexicon.lemma(t) } else { t };
        if let Some(r) = lexicon.rating(form) {
            sum += r;
            matched += 1;
        }
    }
    if matched == 0 {
        return Err(Error::NoCoverage);
    }
    Ok(AoaMean {
        mean: sum / matched as f64,
        coverage: matched as f64 / tokens.len() as f64,
    })
}
