use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Age-of-acquisition norms keyed by lowercase word form.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AoALexicon {
    ratings: HashMap<String, f64>,
    lemmas: HashMap<String, String>,
}

impl AoALexicon {
    pub fn from_entries<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        let mut lex = AoALexicon::default();
        for (i, (word, rating)) in entries.into_iter().enumerate() {
            if !(rating.is_finite() && rating > 0.0) {
                return Err(Error::Lexicon {
                    line: i + 1,
                    message: format!("rating {rating} must be positive and finite"),
                });
            }
            lex.ratings.insert(word.as_ref().to_lowercase(), rating);
        }
        Ok(lex)
    }

    pub fn with_lemma(mut self, word: &str, lemma: &str) -> Self {
        self.lemmas.insert(word.to_lowercase(), lemma.to_lowercase());
        self
    }

    /// Case-insensitive rating lookup. `None` when the word is not normed.
    pub fn rating(&self, word: &str) -> Option<f64> {
        match self.ratings.get(word) {
            Some(&r) => Some(r),
            None => self.ratings.get(&word.to_lowercase()).copied(),
        }
    }

    /// Lemma from the lemma column, falling back to the word itself.
    pub fn lemma<'a>(&'a self, word: &'a str) -> &'a str {
        self.lemmas.get(word).map(String::as_str).unwrap_or(word)
    }

    pub fn has_lemmas(&self) -> bool {
        !self.lemmas.is_empty()
    }

    pub fn len(&self) -> usize {
        self.ratings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratings.is_empty()
    }
}

pub fn load_aoa_lexicon(path: impl AsRef<Path>) -> Result<AoALexicon> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_aoa_lexicon(file)
}

/// Reads CSV with header `word,aoa[,lemma]`. Line numbers in errors are
/// 1-based file lines, header included. Lines starting with `#` are ignored.
pub fn read_aoa_lexicon<R: Read>(reader: R) -> Result<AoALexicon> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(false)
        .comment(Some(b'#'))
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Lexicon {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    let has_lemma = match names.as_slice() {
        ["word", "aoa"] => false,
        ["word", "aoa", "lemma"] => true,
        _ => {
            return Err(Error::Lexicon {
                line: 1,
                message: format!("expected header `word,aoa[,lemma]`, got `{}`", names.join(",")),
            })
        }
    };
    let mut lex = AoALexicon::default();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Lexicon {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let word = rec[0].trim().to_lowercase();
        if word.is_empty() {
            return Err(Error::Lexicon {
                line,
                message: "empty word".into(),
            });
        }
        let raw = rec[1].trim();
        let rating: f64 = raw.parse().map_err(|_| Error::Lexicon {
            line,
            message: format!("non-numeric rating `{raw}` for `{word}`"),
        })?;
        if !(rating.is_finite() && rating > 0.0) {
            return Err(Error::Lexicon {
                line,
                message: format!("rating {rating} for `{word}` must be positive and finite"),
            });
        }
        if has_lemma {
            let lemma = rec[2].trim().to_lowercase();
            if !lemma.is_empty() && lemma != word {
                lex.lemmas.insert(word.clone(), lemma);
            }
        }
        lex.ratings.insert(word, rating);
    }
    Ok(lex)
}

/// Writes `word,aoa,lemma` sorted by word; lemma empty when it is the word.
pub fn write_aoa_lexicon<W: Write>(writer: W, lex: &AoALexicon) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::io("<lexicon>", std::io::Error::other(e));
    w.write_record(["word", "aoa", "lemma"]).map_err(io)?;
    let mut words: Vec<(&String, &f64)> = lex.ratings.iter().collect();
    words.sort_by(|a, b| a.0.cmp(b.0));
    for (word, rating) in words {
        let lemma = lex.lemmas.get(word).map(String::as_str).unwrap_or("");
        w.write_record([word.as_str(), &rating.to_string(), lemma])
            .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io("<lexicon>", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_line_file() {
        let lex = read_aoa_lexicon("word,aoa\na,2.5\ndog,4.1\n".as_bytes()).unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.rating("dog"), Some(4.1));
        assert_eq!(lex.rating("DOG"), Some(4.1));
    }

    #[test]
    fn write_then_read() {
        let lex = AoALexicon::from_entries([("dogs", 4.5), ("dog", 4.0)])
            .unwrap()
            .with_lemma("dogs", "dog");
        let mut buf = b"# seed=1\n".to_vec();
        write_aoa_lexicon(&mut buf, &lex).unwrap();
        assert_eq!(read_aoa_lexicon(buf.as_slice()).unwrap(), lex);
    }

    #[test]
    fn absent_word_is_not_found() {
        let lex = read_aoa_lexicon("word,aoa\na,2.5\n".as_bytes()).unwrap();
        assert_eq!(lex.rating("zebra"), None);
    }

    #[test]
    fn non_numeric_rating_reports_line() {
        let err = read_aoa_lexicon("word,aoa\na,2.5\ndog,NA\n".as_bytes()).unwrap_err();
        match err {
            Error::Lexicon { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("NA"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn lemma_column_maps_forms() {
        let lex = read_aoa_lexicon("word,aoa,lemma\ndogs,4.3,dog\ndog,4.1,dog\n".as_bytes()).unwrap();
        assert_eq!(lex.lemma("dogs"), "dog");
        assert_eq!(lex.lemma("dog"), "dog");
        assert_eq!(lex.lemma("cat"), "cat");
        assert!(lex.has_lemmas());
    }

    #[test]
    fn bad_header_and_bad_values() {
        assert!(read_aoa_lexicon("w,r\na,1\n".as_bytes()).is_err());
        assert!(read_aoa_lexicon("word,aoa\na,-1\n".as_bytes()).is_err());
        assert!(read_aoa_lexicon("word,aoa\na,inf\n".as_bytes()).is_err());
    }
}
