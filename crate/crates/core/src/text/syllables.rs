use crate::error::{Error, Result};

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u' | b'y')
}

/// Vowel pairs read as two syllables ("ra-di-o", "ma-te-ri-al"), unless
/// the pair follows one of the listed consonants ("na-tion", "so-cial").
const HIATUS: [(&[u8; 2], &[u8]); 4] = [(b"ia", b"cstx"), (b"io", b"cstxg"), (b"iu", b"cstxg"), (b"ua", b"qg")];

/// Heuristic syllable count: vowel groups with silent-e, `-es` and `-ed`
/// adjustments and a few hiatus pairs. Hyphenated words sum their parts.
/// Never less than 1.
pub fn count_syllables(word: &str) -> Result<usize> {
    let lower = word.to_lowercase();
    let parts: Vec<&str> = lower
        .split(['-', '\'', '’'])
        .filter(|p| p.chars().any(|c| c.is_alphabetic()))
        .collect();
    if parts.is_empty() {
        return Err(Error::InvalidArgument(format!("no letters in word `{word}`")));
    }
    // possessive or contraction tails ("'s", "n't") carry no extra syllable
    let n: usize = parts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if i > 0 && lower.contains(['\'', '’']) && p.len() <= 2 {
                0
            } else {
                count_part(p)
            }
        })
        .sum();
    Ok(n.max(1))
}

fn count_part(part: &str) -> usize {
    let w: Vec<u8> = part.bytes().filter(|b| b.is_ascii_alphabetic()).collect();
    if w.is_empty() {
        // non-ASCII letters only; treat as one syllable
        return 1;
    }
    let len = w.len();
    let mut count = 0usize;
    let mut prev_vowel = false;
    for (i, &c) in w.iter().enumerate() {
        // word-initial y is a consonant ("yes", "young")
        let v = is_vowel(c) && !(c == b'y' && i == 0);
        if v && !prev_vowel {
            count += 1;
        } else if v && prev_vowel && i >= 1 {
            let pair = [w[i - 1], c];
            let before = if i >= 2 { Some(w[i - 2]) } else { None };
            if HIATUS
                .iter()
                .any(|(p, blockers)| **p == pair && before.is_some_and(|b| !blockers.contains(&b) && !is_vowel(b)))
            {
                count += 1;
            }
        }
        prev_vowel = v;
    }

    let cons = |i: usize| !is_vowel(w[i]);
    if len >= 3 && w[len - 1] == b'e' && cons(len - 2) {
        let consonant_le = w[len - 2] == b'l' && len >= 4 && cons(len - 3);
        if !consonant_le && count > 1 {
            count -= 1;
        }
    } else if len >= 4 && w[len - 1] == b'd' && w[len - 2] == b'e' && cons(len - 3) {
        if !matches!(w[len - 3], b't' | b'd') && count > 1 {
            count -= 1;
        }
    } else if len >= 4 && w[len - 1] == b's' && w[len - 2] == b'e' && cons(len - 3) {
        let sibilant = matches!(w[len - 3], b's' | b'x' | b'z' | b'c' | b'g')
            || (w[len - 3] == b'h' && matches!(w[len - 4], b'c' | b's'));
        // "tables", "candles" keep the syllable like "table"
        let consonant_les = w[len - 3] == b'l' && len >= 5 && cons(len - 4);
        if !sibilant && !consonant_les && count > 1 {
            count -= 1;
        }
    }
    count.max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_words() {
        assert_eq!(count_syllables("cat").unwrap(), 1);
        assert_eq!(count_syllables("banana").unwrap(), 3);
        assert_eq!(count_syllables("make").unwrap(), 1);
        assert_eq!(count_syllables("table").unwrap(), 2);
        assert_eq!(count_syllables("Radio").unwrap(), 3);
        assert_eq!(count_syllables("nation").unwrap(), 2);
        assert_eq!(count_syllables("well-known").unwrap(), 2);
        assert_eq!(count_syllables("don't").unwrap(), 1);
    }

    #[test]
    fn empty_word_is_an_error() {
        assert!(count_syllables("").is_err());
        assert!(count_syllables("--").is_err());
    }

    /// Reference counts from a pronouncing dictionary.
    const DICTIONARY: &[(&str, usize)] = &[
        ("cat", 1),
        ("dog", 1),
        ("make", 1),
        ("the", 1),
        ("time", 1),
        ("house", 1),
        ("school", 1),
        ("world", 1),
        ("tree", 1),
        ("through", 1),
        ("thought", 1),
        ("night", 1),
        ("friend", 1),
        ("walked", 1),
        ("jumped", 1),
        ("makes", 1),
        ("loved", 1),
        ("dream", 1),
        ("smile", 1),
        ("street", 1),
        ("bread", 1),
        ("love", 1),
        ("large", 1),
        ("phone", 1),
        ("change", 1),
        ("strength", 1),
        ("played", 1),
        ("shoe", 1),
        ("free", 1),
        ("years", 1),
        ("table", 2),
        ("apple", 2),
        ("water", 2),
        ("people", 2),
        ("little", 2),
        ("simple", 2),
        ("problem", 2),
        ("women", 2),
        ("morning", 2),
        ("father", 2),
        ("mother", 2),
        ("country", 2),
        ("happy", 2),
        ("money", 2),
        ("wanted", 2),
        ("boxes", 2),
        ("children", 2),
        ("student", 2),
        ("teacher", 2),
        ("music", 2),
        ("paper", 2),
        ("garden", 2),
        ("window", 2),
        ("open", 2),
        ("city", 2),
        ("over", 2),
        ("yellow", 2),
        ("river", 2),
        ("began", 2),
        ("number", 2),
        ("sudden", 2),
        ("wishes", 2),
        ("pages", 2),
        ("baby", 2),
        ("before", 2),
        ("english", 2),
        ("nation", 2),
        ("climate", 2),
        ("tables", 2),
        ("science", 2),
        ("banana", 3),
        ("computer", 3),
        ("beautiful", 3),
        ("family", 3),
        ("elephant", 3),
        ("important", 3),
        ("government", 3),
        ("example", 3),
        ("together", 3),
        ("another", 3),
        ("radio", 3),
        ("energy", 3),
        ("history", 3),
        ("animal", 3),
        ("hospital", 3),
        ("potato", 3),
        ("tomato", 3),
        ("remember", 3),
        ("exercise", 3),
        ("telephone", 3),
        ("understand", 3),
        ("yesterday", 3),
        ("newspaper", 3),
        ("several", 3),
        ("possible", 3),
        ("difficult", 3),
        ("holiday", 3),
        ("celebrate", 3),
        ("video", 3),
        ("area", 3),
        ("education", 4),
        ("information", 4),
        ("situation", 4),
        ("american", 4),
        ("television", 4),
        ("activity", 4),
        ("ability", 4),
        ("economy", 4),
        ("community", 4),
        ("material", 4),
        ("biology", 4),
        ("variety", 4),
        ("university", 5),
        ("opportunity", 5),
        ("international", 5),
        ("organization", 5),
        ("vocabulary", 5),
    ];

    #[test]
    fn agrees_with_dictionary_on_fixture() {
        assert!(DICTIONARY.len() >= 100);
        let misses: Vec<_> = DICTIONARY
            .iter()
            .filter(|(w, n)| count_syllables(w).unwrap() != *n)
            .map(|(w, n)| format!("{w}: got {} want {n}", count_syllables(w).unwrap()))
            .collect();
        let agreement = 1.0 - misses.len() as f64 / DICTIONARY.len() as f64;
        assert!(agreement >= 0.90, "agreement {agreement:.3}; misses {misses:?}");
    }
}
