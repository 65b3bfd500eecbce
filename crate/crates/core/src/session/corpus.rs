use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Level, OPTIONS_PER_QUESTION, QUESTIONS_PER_ARTICLE};
use crate::error::{Error, Result};
use crate::text::tokenize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub text: String,
    pub options: [String; OPTIONS_PER_QUESTION],
    pub correct: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Article {
    pub article_id: String,
    pub level: Level,
    pub title: String,
    pub body: String,
    pub word_count: usize,
    /// Shared by both levels of the same article.
    pub questions: Vec<Question>,
}

impl Article {
    pub fn new(
        article_id: impl Into<String>,
        level: Level,
        title: impl Into<String>,
        body: impl Into<String>,
        questions: Vec<Question>,
    ) -> Self {
        let body = body.into();
        Article {
            article_id: article_id.into(),
            level,
            title: title.into(),
            word_count: tokenized_word_count(&body),
            body,
            questions,
        }
    }

    pub fn answer_key(&self) -> Vec<u8> {
        self.questions.iter().map(|q| q.correct).collect()
    }
}

pub fn tokenized_word_count(body: &str) -> usize {
    tokenize(body).len()
}

/// Lookup by `(article_id, level)`.
#[derive(Debug, Clone)]
pub struct CorpusIndex<'a> {
    by_key: BTreeMap<(&'a str, Level), &'a Article>,
}

impl<'a> CorpusIndex<'a> {
    pub fn new(articles: &'a [Article]) -> Self {
        CorpusIndex {
            by_key: articles.iter().map(|a| ((a.article_id.as_str(), a.level), a)).collect(),
        }
    }

    pub fn get(&self, article_id: &str, level: Level) -> Option<&'a Article> {
        self.by_key.get(&(article_id, level)).copied()
    }

    pub fn len(&self) -> usize {
        self.by_key.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_key.is_empty()
    }
}

/// Loads a corpus laid out as one directory per article id holding
/// `elementary.txt`, `advanced.txt` and `questions.tsv`. An optional
/// `title.txt` overrides the default title (the article id).
///
/// Articles are returned sorted by id, elementary before advanced.
pub fn load_corpus(dir: impl AsRef<Path>) -> Result<Vec<Article>> {
    let dir = dir.as_ref();
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut ids = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if entry.file_type().map_err(|e| Error::io(entry.path(), e))?.is_dir() {
            ids.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    if ids.is_empty() {
        return Err(Error::Corpus(format!("{}: empty corpus", dir.display())));
    }
    ids.sort();

    let mut articles = Vec::with_capacity(ids.len() * 2);
    for id in ids {
        let adir = dir.join(&id);
        let qpath = adir.join("questions.tsv");
        if !qpath.is_file() {
            return Err(Error::Corpus(format!("article `{id}`: missing questions.tsv")));
        }
        let qtext = fs::read_to_string(&qpath).map_err(|e| Error::io(&qpath, e))?;
        let questions =
            parse_questions(&qtext).map_err(|m| Error::Corpus(format!("article `{id}`: questions.tsv: {m}")))?;
        let title = match fs::read_to_string(adir.join("title.txt")) {
            Ok(t) => t.trim().to_string(),
            Err(_) => id.clone(),
        };
        for level in Level::ALL {
            let path = adir.join(format!("{level}.txt"));
            if !path.is_file() {
                return Err(Error::Corpus(format!(
                    "article `{id}`: missing {level} counterpart ({})",
                    path.display()
                )));
            }
            let body = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let article = Article::new(id.clone(), level, title.clone(), body, questions.clone());
            if article.word_count == 0 {
                return Err(Error::Corpus(format!("article `{id}` ({level}): no words")));
            }
            articles.push(article);
        }
    }
    Ok(articles)
}

/// Inverse of the `questions.tsv` parser.
pub fn questions_tsv(questions: &[Question]) -> String {
    let mut out = String::new();
    for q in questions {
        out.push_str(&q.text);
        for o in &q.options {
            out.push('\t');
            out.push_str(o);
        }
        out.push_str(&format!("\t{}\n", q.correct));
    }
    out
}

/// Tab-separated: question, four options, correct index (0-3). Blank lines
/// and lines starting with `#` are ignored.
fn parse_questions(text: &str) -> std::result::Result<Vec<Question>, String> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != OPTIONS_PER_QUESTION + 2 {
            return Err(format!(
                "line {}: expected {} tab-separated columns, got {}",
                n + 1,
                OPTIONS_PER_QUESTION + 2,
                cols.len()
            ));
        }
        let correct: u8 = cols[OPTIONS_PER_QUESTION + 1]
            .trim()
            .parse()
            .ok()
            .filter(|&c: &u8| (c as usize) < OPTIONS_PER_QUESTION)
            .ok_or_else(|| format!("line {}: correct index must be 0-3", n + 1))?;
        let options = std::array::from_fn(|i| cols[i + 1].trim().to_string());
        out.push(Question {
            text: cols[0].trim().to_string(),
            options,
            correct,
        });
    }
    if out.len() != QUESTIONS_PER_ARTICLE {
        return Err(format!(
            "expected {QUESTIONS_PER_ARTICLE} questions, found {}",
            out.len()
        ));
    }
    Ok(out)
}
