//! Sessions, articles, participants and lexicons, plus file ingestion.
//!
//! The canonical session file is JSON lines, one [`Session`] per line. The
//! field names match the struct fields exactly; times are integer
//! milliseconds and offsets real CSS pixels.

mod adapter;
mod corpus;
mod lexicon;
mod participant;

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub use adapter::{adapt_export, AdaptedExport, AdapterMapping};
pub use corpus::{load_corpus, questions_tsv, tokenized_word_count, Article, CorpusIndex, Question};
pub use lexicon::{load_aoa_lexicon, read_aoa_lexicon, write_aoa_lexicon, AoALexicon};
pub use participant::{
    load_participants, read_participants, write_participants, AgeBand, Participant, ProficiencyRange,
};

/// Number of comprehension questions attached to every article.
pub const QUESTIONS_PER_ARTICLE: usize = 3;
/// Number of options per multiple-choice question.
pub const OPTIONS_PER_QUESTION: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Elementary,
    Advanced,
}

impl Level {
    pub const ALL: [Level; 2] = [Level::Elementary, Level::Advanced];

    pub fn as_str(self) -> &'static str {
        match self {
            Level::Elementary => "elementary",
            Level::Advanced => "advanced",
        }
    }

    /// Accepts the canonical names and the common short forms used in exports.
    pub fn parse(s: &str) -> Option<Level> {
        match s.trim().to_ascii_lowercase().as_str() {
            "elementary" | "ele" | "elem" | "beginner" => Some(Level::Elementary),
            "advanced" | "adv" => Some(Level::Advanced),
            _ => None,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One throttled scroll sample: elapsed time since the text was shown and
/// the vertical offset of the top of the viewport.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScrollEvent {
    pub t_ms: u64,
    pub y_px: f64,
}

impl ScrollEvent {
    pub fn new(t_ms: u64, y_px: f64) -> Self {
        ScrollEvent { t_ms, y_px }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub width_px: f64,
    pub height_px: f64,
    pub content_height_px: f64,
}

impl Viewport {
    /// Largest offset the container can scroll to.
    pub fn scrollable_height(&self) -> f64 {
        self.content_height_px - self.height_px
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SessionKey {
    pub participant_id: String,
    pub article_id: String,
    pub level: Level,
}

impl fmt::Display for SessionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.participant_id, self.article_id, self.level)
    }
}

/// One participant reading one article at one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub participant_id: String,
    pub article_id: String,
    pub level: Level,
    pub viewport: Viewport,
    pub reading_events: Vec<ScrollEvent>,
    pub answering_events: Vec<ScrollEvent>,
    pub read_time_ms: u64,
    pub answers: Vec<u8>,
    pub score: u8,
}

impl Session {
    pub fn key(&self) -> SessionKey {
        SessionKey {
            participant_id: self.participant_id.clone(),
            article_id: self.article_id.clone(),
            level: self.level,
        }
    }

    /// Recomputes the score against an answer key.
    pub fn recompute_score(&self, correct: &[u8]) -> u8 {
        self.answers.iter().zip(correct).filter(|(a, c)| a == c).count() as u8
    }
}

/// Counters collected while ingesting a session file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub sessions: usize,
    /// Offsets above the scrollable maximum that were clamped.
    pub clamped_offsets: usize,
}

/// Parses a canonical session file.
pub fn parse_session_file(path: impl AsRef<Path>) -> Result<Vec<Session>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let (sessions, report) = read_sessions(BufReader::new(file))?;
    if report.clamped_offsets > 0 {
        log::warn!(
            "{}: clamped {} offsets above the scrollable maximum",
            path.display(),
            report.clamped_offsets
        );
    }
    Ok(sessions)
}

/// Parses canonical JSON lines from any reader. Blank lines and lines
/// starting with `#` are skipped; record indices count the remaining lines
/// from 0.
pub fn read_sessions<R: Read>(reader: R) -> Result<(Vec<Session>, IngestReport)> {
    let mut report = IngestReport::default();
    let mut sessions = Vec::new();
    let reader = BufReader::new(reader);
    let mut record = 0usize;
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io("<session stream>", e))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let value: Value =
            serde_json::from_str(&line).map_err(|e| Error::malformed(record, "<json>", e.to_string()))?;
        let Value::Object(obj) = value else {
            return Err(Error::malformed(record, "<json>", "expected an object"));
        };
        let session = session_from_object(record, &obj, &mut report)?;
        sessions.push(session);
        record += 1;
    }
    report.sessions = sessions.len();
    Ok((sessions, report))
}

/// Writes sessions as canonical JSON lines.
pub fn write_sessions<W: Write>(mut writer: W, sessions: &[Session]) -> Result<()> {
    for s in sessions {
        let line = serde_json::to_string(s).expect("sessions always serialize");
        writeln!(writer, "{line}").map_err(|e| Error::io("<session stream>", e))?;
    }
    Ok(())
}

pub fn write_session_file(path: impl AsRef<Path>, sessions: &[Session]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_sessions(&mut w, sessions)?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Recomputes every score from the answer key; a mismatch is an error.
pub fn validate_scores(sessions: &[Session], corpus: &CorpusIndex<'_>) -> Result<()> {
    for (i, s) in sessions.iter().enumerate() {
        let article = corpus
            .get(&s.article_id, s.level)
            .ok_or_else(|| Error::malformed(i, "article_id", format!("unknown article `{}`", s.article_id)))?;
        let expected = s.recompute_score(&article.answer_key());
        if expected != s.score {
            return Err(Error::malformed(
                i,
                "score",
                format!("stored {} but answers give {}", s.score, expected),
            ));
        }
    }
    Ok(())
}

/// Sets every score from the answer key, for exports that carry answers
/// but no score.
pub fn fill_scores(sessions: &mut [Session], corpus: &CorpusIndex<'_>) -> Result<()> {
    for (i, s) in sessions.iter_mut().enumerate() {
        let article = corpus
            .get(&s.article_id, s.level)
            .ok_or_else(|| Error::malformed(i, "article_id", format!("unknown article `{}`", s.article_id)))?;
        s.score = s.recompute_score(&article.answer_key());
    }
    Ok(())
}

/// Builds and validates a session from already-typed parts. Shared by the
/// JSON reader and the export adapter.
pub(crate) fn validated_session(record: usize, mut session: Session, report: &mut IngestReport) -> Result<Session> {
    if session.participant_id.is_empty() {
        return Err(Error::malformed(record, "participant_id", "empty"));
    }
    if session.article_id.is_empty() {
        return Err(Error::malformed(record, "article_id", "empty"));
    }
    let vp = session.viewport;
    for (name, v) in [
        ("viewport.width_px", vp.width_px),
        ("viewport.height_px", vp.height_px),
        ("viewport.content_height_px", vp.content_height_px),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::malformed(record, name, "must be positive and finite"));
        }
    }
    let max_offset = vp.scrollable_height().max(0.0);
    let key = session.key();
    for (field, events) in [
        ("reading_events", &mut session.reading_events),
        ("answering_events", &mut session.answering_events),
    ] {
        for (i, ev) in events.iter_mut().enumerate() {
            if !ev.y_px.is_finite() || ev.y_px < 0.0 {
                return Err(Error::malformed(
                    record,
                    &format!("{field}[{i}].y_px"),
                    "must be finite and non-negative",
                ));
            }
            if ev.y_px > max_offset {
                ev.y_px = max_offset;
                report.clamped_offsets += 1;
            }
        }
        if let Some(i) = events.windows(2).position(|w| w[1].t_ms <= w[0].t_ms) {
            return Err(Error::Unordered {
                session: format!("record {record} ({key})"),
                field,
                index: i + 1,
            });
        }
    }
    if let Some(last) = session.reading_events.last() {
        if session.read_time_ms < last.t_ms {
            return Err(Error::malformed(
                record,
                "read_time_ms",
                format!(
                    "{} is before the last reading event at {}",
                    session.read_time_ms, last.t_ms
                ),
            ));
        }
    }
    if session.answers.len() != QUESTIONS_PER_ARTICLE {
        return Err(Error::malformed(
            record,
            "answers",
            format!(
                "expected {QUESTIONS_PER_ARTICLE} answers, got {}",
                session.answers.len()
            ),
        ));
    }
    if let Some(a) = session.answers.iter().find(|&&a| a as usize >= OPTIONS_PER_QUESTION) {
        return Err(Error::malformed(
            record,
            "answers",
            format!("option index {a} out of range"),
        ));
    }
    if session.score as usize > QUESTIONS_PER_ARTICLE {
        return Err(Error::malformed(record, "score", "must be within 0..=3"));
    }
    Ok(session)
}

fn session_from_object(record: usize, obj: &Map<String, Value>, report: &mut IngestReport) -> Result<Session> {
    const FIELDS: [&str; 9] = [
        "participant_id",
        "article_id",
        "level",
        "viewport",
        "reading_events",
        "answering_events",
        "read_time_ms",
        "answers",
        "score",
    ];
    if let Some(extra) = obj.keys().find(|k| !FIELDS.contains(&k.as_str())) {
        return Err(Error::malformed(record, extra, "unknown field"));
    }
    let f = Fields { record, obj };
    let level_str = f.string("level")?;
    let level = Level::parse(&level_str)
        .ok_or_else(|| Error::malformed(record, "level", format!("unknown level `{level_str}`")))?;
    let viewport = {
        let v = f.get("viewport")?;
        let Value::Object(vobj) = v else {
            return Err(Error::malformed(record, "viewport", "expected an object"));
        };
        let vf = Fields { record, obj: vobj };
        Viewport {
            width_px: vf.number("width_px").map_err(|e| prefix(e, "viewport."))?,
            height_px: vf.number("height_px").map_err(|e| prefix(e, "viewport."))?,
            content_height_px: vf.number("content_height_px").map_err(|e| prefix(e, "viewport."))?,
        }
    };
    let answers = f
        .array("answers")?
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_u64()
                .filter(|&a| a <= u8::MAX as u64)
                .map(|a| a as u8)
                .ok_or_else(|| {
                    Error::malformed(
                        record,
                        &format!("answers[{i}]"),
                        "expected a small non-negative integer",
                    )
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let score = f.integer("score")?;
    if score > QUESTIONS_PER_ARTICLE as u64 {
        return Err(Error::malformed(record, "score", "must be within 0..=3"));
    }
    let session = Session {
        participant_id: f.string("participant_id")?,
        article_id: f.string("article_id")?,
        level,
        viewport,
        reading_events: f.events("reading_events")?,
        answering_events: f.events("answering_events")?,
        read_time_ms: f.integer("read_time_ms")?,
        answers,
        score: score as u8,
    };
    validated_session(record, session, report)
}

fn prefix(err: Error, p: &str) -> Error {
    match err {
        Error::Malformed { record, field, message } => Error::Malformed {
            record,
            field: format!("{p}{field}"),
            message,
        },
        other => other,
    }
}

struct Fields<'a> {
    record: usize,
    obj: &'a Map<String, Value>,
}

impl Fields<'_> {
    fn get(&self, name: &str) -> Result<&Value> {
        self.obj
            .get(name)
            .ok_or_else(|| Error::malformed(self.record, name, "missing"))
    }

    fn string(&self, name: &str) -> Result<String> {
        self.get(name)?
            .as_str()
            .map(str::to_owned)
            .ok_or_else(|| Error::malformed(self.record, name, "expected a string"))
    }

    fn number(&self, name: &str) -> Result<f64> {
        self.get(name)?
            .as_f64()
            .ok_or_else(|| Error::malformed(self.record, name, "expected a number"))
    }

    fn integer(&self, name: &str) -> Result<u64> {
        self.get(name)?
            .as_u64()
            .ok_or_else(|| Error::malformed(self.record, name, "expected a non-negative integer"))
    }

    fn array(&self, name: &str) -> Result<&Vec<Value>> {
        self.get(name)?
            .as_array()
            .ok_or_else(|| Error::malformed(self.record, name, "expected an array"))
    }

    fn events(&self, name: &str) -> Result<Vec<ScrollEvent>> {
        self.array(name)?
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let bad = |field: &str, msg: &str| Error::malformed(self.record, &format!("{name}[{i}].{field}"), msg);
                let obj = v.as_object().ok_or_else(|| bad("<event>", "expected an object"))?;
                let t_ms = obj
                    .get("t_ms")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| bad("t_ms", "expected a non-negative integer"))?;
                let y_px = obj
                    .get("y_px")
                    .and_then(Value::as_f64)
                    .ok_or_else(|| bad("y_px", "expected a number"))?;
                if obj.len() != 2 {
                    return Err(bad("<event>", "unexpected extra fields"));
                }
                Ok(ScrollEvent { t_ms, y_px })
            })
            .collect()
    }
}
