//! Column-mapping adapter for tabular exports.
//!
//! An export is two or three CSV files: long-format scroll events (one row
//! per sample), one row per participant × article reading, and optionally a
//! demographic table. A small TOML mapping file names the source column for
//! every canonical key:
//!
//! ```toml
//! [files]
//! events = "events.csv"
//! sessions = "sessions.csv"
//! participants = "participants.csv"
//!
//! [columns]
//! "event.participant_id" = "worker"
//! "event.t_ms" = "timestamp"
//! # ...
//!
//! [options]
//! time_unit = "ms"
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{
    validated_session, AgeBand, IngestReport, Level, Participant, ProficiencyRange, ScrollEvent, Session, Viewport,
};
use crate::error::{Error, Result};

const EVENT_KEYS: [&str; 5] = [
    "event.participant_id",
    "event.article_id",
    "event.level",
    "event.t_ms",
    "event.y_px",
];
const SESSION_KEYS: [&str; 8] = [
    "session.participant_id",
    "session.article_id",
    "session.level",
    "session.read_time_ms",
    "session.content_height_px",
    "session.answer_1",
    "session.answer_2",
    "session.answer_3",
];
const PARTICIPANT_KEYS: [&str; 7] = [
    "participant.participant_id",
    "participant.first_language",
    "participant.self_proficiency",
    "participant.age_band",
    "participant.education",
    "participant.hours_reading_per_week",
    "participant.locale",
];

#[derive(Debug, Clone, Deserialize)]
pub struct AdapterFiles {
    pub events: PathBuf,
    pub sessions: PathBuf,
    #[serde(default)]
    pub participants: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct AdapterOptions {
    /// `ms` or `s`; applies to event timestamps and read time.
    pub time_unit: String,
    /// Subtract the first reading timestamp of each session.
    pub rebase_time: bool,
    pub answers_one_based: bool,
    pub phase_reading: String,
    pub phase_answering: String,
    pub viewport_width_px: f64,
    pub viewport_height_px: f64,
    pub proficiency_min: i32,
    pub proficiency_max: i32,
}

impl Default for AdapterOptions {
    fn default() -> Self {
        AdapterOptions {
            time_unit: "ms".into(),
            rebase_time: false,
            answers_one_based: false,
            phase_reading: "reading".into(),
            phase_answering: "answering".into(),
            viewport_width_px: 1080.0,
            viewport_height_px: 1920.0,
            proficiency_min: 1,
            proficiency_max: 5,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct AdapterMapping {
    pub files: AdapterFiles,
    pub columns: BTreeMap<String, String>,
    #[serde(default)]
    pub options: AdapterOptions,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl AdapterMapping {
    /// Reads a mapping file; relative file paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut mapping = Self::parse(&text)?;
        mapping.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(mapping)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mapping: AdapterMapping = toml::from_str(text).map_err(|e| Error::Mapping(e.to_string()))?;
        for key in EVENT_KEYS.iter().chain(&SESSION_KEYS) {
            if !mapping.columns.contains_key(*key) {
                return Err(Error::Mapping(format!("no source column for `{key}`")));
            }
        }
        if mapping.files.participants.is_some() {
            for key in PARTICIPANT_KEYS {
                if !mapping.columns.contains_key(key) {
                    return Err(Error::Mapping(format!("no source column for `{key}`")));
                }
            }
        }
        match mapping.options.time_unit.as_str() {
            "ms" | "s" => {}
            other => return Err(Error::Mapping(format!("unknown time_unit `{other}`"))),
        }
        Ok(mapping)
    }

    pub fn with_base_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.base_dir = dir.into();
        self
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn time_scale(&self) -> f64 {
        if self.options.time_unit == "s" {
            1000.0
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdaptedExport {
    /// Scores are 0 when `scores_provided` is false; see [`super::fill_scores`].
    pub sessions: Vec<Session>,
    pub scores_provided: bool,
    pub participants: Option<Vec<Participant>>,
    pub report: IngestReport,
}

/// A CSV file with named-column access through the mapping.
struct Table {
    name: String,
    rows: Vec<csv::StringRecord>,
    index: HashMap<String, usize>,
}

impl Table {
    fn open(path: &Path) -> Result<Table> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv::Reader::from_reader(file);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Mapping(format!("{}: {e}", path.display())))?
            .clone();
        let index = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim().to_string(), i))
            .collect();
        let rows = rdr
            .records()
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Mapping(format!("{}: {e}", path.display())))?;
        Ok(Table {
            name: path.display().to_string(),
            rows,
            index,
        })
    }

    fn column(&self, mapping: &AdapterMapping, key: &str) -> Result<Option<usize>> {
        let Some(col) = mapping.columns.get(key) else {
            return Ok(None);
        };
        self.index
            .get(col)
            .copied()
            .map(Some)
            .ok_or_else(|| Error::Mapping(format!("column `{col}` (for `{key}`) not found in {}", self.name)))
    }

    fn required(&self, mapping: &AdapterMapping, key: &str) -> Result<usize> {
        self.column(mapping, key)?
            .ok_or_else(|| Error::Mapping(format!("no source column for `{key}`")))
    }
}

fn cell(row: &csv::StringRecord, col: usize) -> &str {
    row.get(col).unwrap_or("").trim()
}

fn number(row: &csv::StringRecord, col: usize, record: usize, key: &str) -> Result<f64> {
    let raw = cell(row, col);
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::malformed(record, key, format!("not a number: `{raw}`")))
}

fn level(row: &csv::StringRecord, col: usize, record: usize, key: &str) -> Result<Level> {
    let raw = cell(row, col);
    Level::parse(raw).ok_or_else(|| Error::malformed(record, key, format!("unknown level `{raw}`")))
}

type ReadingKey = (String, String, Level);

/// Converts a mapped export into canonical sessions (and participants).
///
/// Sessions follow the row order of the sessions table. A reading with no
/// event rows yields a session with empty event lists, which the
/// engagement filter later rejects as `no_scroll`.
pub fn adapt_export(mapping: &AdapterMapping) -> Result<AdaptedExport> {
    let scale = mapping.time_scale();
    let events_table = Table::open(&mapping.resolve(&mapping.files.events))?;
    let ep = events_table.required(mapping, "event.participant_id")?;
    let ea = events_table.required(mapping, "event.article_id")?;
    let el = events_table.required(mapping, "event.level")?;
    let et = events_table.required(mapping, "event.t_ms")?;
    let ey = events_table.required(mapping, "event.y_px")?;
    let ephase = events_table.column(mapping, "event.phase")?;

    let mut reading: HashMap<ReadingKey, Vec<ScrollEvent>> = HashMap::new();
    let mut answering: HashMap<ReadingKey, Vec<ScrollEvent>> = HashMap::new();
    for (i, row) in events_table.rows.iter().enumerate() {
        let key = (
            cell(row, ep).to_string(),
            cell(row, ea).to_string(),
            level(row, el, i, "event.level")?,
        );
        let t = number(row, et, i, "event.t_ms")? * scale;
        if t < 0.0 {
            return Err(Error::malformed(i, "event.t_ms", "negative time"));
        }
        let ev = ScrollEvent::new(t.round() as u64, number(row, ey, i, "event.y_px")?);
        let target = match ephase.map(|c| cell(row, c)) {
            None => &mut reading,
            Some(p) if p.eq_ignore_ascii_case(&mapping.options.phase_reading) => &mut reading,
            Some(p) if p.eq_ignore_ascii_case(&mapping.options.phase_answering) => &mut answering,
            Some(p) => return Err(Error::malformed(i, "event.phase", format!("unknown phase `{p}`"))),
        };
        target.entry(key).or_default().push(ev);
    }

    let st = Table::open(&mapping.resolve(&mapping.files.sessions))?;
    let sp = st.required(mapping, "session.participant_id")?;
    let sa = st.required(mapping, "session.article_id")?;
    let sl = st.required(mapping, "session.level")?;
    let srt = st.required(mapping, "session.read_time_ms")?;
    let sch = st.required(mapping, "session.content_height_px")?;
    let sans = [
        st.required(mapping, "session.answer_1")?,
        st.required(mapping, "session.answer_2")?,
        st.required(mapping, "session.answer_3")?,
    ];
    let sscore = st.column(mapping, "session.score")?;
    let svw = st.column(mapping, "session.viewport_width_px")?;
    let svh = st.column(mapping, "session.viewport_height_px")?;

    let mut report = IngestReport::default();
    let mut sessions = Vec::with_capacity(st.rows.len());
    for (i, row) in st.rows.iter().enumerate() {
        let key = (
            cell(row, sp).to_string(),
            cell(row, sa).to_string(),
            level(row, sl, i, "session.level")?,
        );
        let mut reading_events = reading.remove(&key).unwrap_or_default();
        let mut answering_events = answering.remove(&key).unwrap_or_default();
        if mapping.options.rebase_time {
            if let Some(origin) = reading_events.first().map(|e| e.t_ms) {
                for e in reading_events.iter_mut().chain(answering_events.iter_mut()) {
                    e.t_ms = e.t_ms.saturating_sub(origin);
                }
            }
        }
        let answers = sans
            .iter()
            .enumerate()
            .map(|(q, &c)| {
                let field = format!("session.answer_{}", q + 1);
                let v = number(row, c, i, &field)?;
                let v = if mapping.options.answers_one_based { v - 1.0 } else { v };
                if v < 0.0 || v.fract() != 0.0 || v > u8::MAX as f64 {
                    return Err(Error::malformed(i, &field, "not an option index"));
                }
                Ok(v as u8)
            })
            .collect::<Result<Vec<_>>>()?;
        let score = match sscore {
            Some(c) => number(row, c, i, "session.score")? as u8,
            None => 0,
        };
        let read_time = number(row, srt, i, "session.read_time_ms")? * scale;
        let viewport = Viewport {
            width_px: match svw {
                Some(c) => number(row, c, i, "session.viewport_width_px")?,
                None => mapping.options.viewport_width_px,
            },
            height_px: match svh {
                Some(c) => number(row, c, i, "session.viewport_height_px")?,
                None => mapping.options.viewport_height_px,
            },
            content_height_px: number(row, sch, i, "session.content_height_px")?,
        };
        let session = Session {
            participant_id: key.0,
            article_id: key.1,
            level: key.2,
            viewport,
            reading_events,
            answering_events,
            read_time_ms: read_time.max(0.0).round() as u64,
            answers,
            score,
        };
        sessions.push(validated_session(i, session, &mut report)?);
    }
    if !reading.is_empty() || !answering.is_empty() {
        log::warn!(
            "{} event groups have no matching session row and were ignored",
            reading.len() + answering.len()
        );
    }
    report.sessions = sessions.len();

    let participants = match &mapping.files.participants {
        Some(p) => Some(adapt_participants(mapping, &mapping.resolve(p))?),
        None => None,
    };
    Ok(AdaptedExport {
        sessions,
        scores_provided: mapping.columns.contains_key("session.score"),
        participants,
        report,
    })
}

fn adapt_participants(mapping: &AdapterMapping, path: &Path) -> Result<Vec<Participant>> {
    let t = Table::open(path)?;
    let cols = PARTICIPANT_KEYS
        .iter()
        .map(|k| t.required(mapping, k))
        .collect::<Result<Vec<_>>>()?;
    let range = ProficiencyRange {
        min: mapping.options.proficiency_min,
        max: mapping.options.proficiency_max,
    };
    let mut out = Vec::with_capacity(t.rows.len());
    for (i, row) in t.rows.iter().enumerate() {
        let proficiency = number(row, cols[2], i, PARTICIPANT_KEYS[2])?;
        let age_band: AgeBand = cell(row, cols[3])
            .parse()
            .map_err(|m: String| Error::malformed(i, PARTICIPANT_KEYS[3], m))?;
        let p = Participant {
            participant_id: cell(row, cols[0]).to_string(),
            first_language: cell(row, cols[1]).to_string(),
            self_proficiency: proficiency as i32,
            age_band,
            education: cell(row, cols[4]).to_string(),
            hours_reading_per_week: number(row, cols[5], i, PARTICIPANT_KEYS[5])?,
            locale: cell(row, cols[6]).to_string(),
        };
        if p.first_language.is_empty() {
            return Err(Error::malformed(i, PARTICIPANT_KEYS[1], "empty"));
        }
        if !range.contains(p.self_proficiency) {
            return Err(Error::malformed(i, PARTICIPANT_KEYS[2], "outside declared band range"));
        }
        out.push(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    const MAPPING: &str = r#"
[files]
events = "ev.csv"
sessions = "ss.csv"
participants = "pp.csv"

[columns]
"event.participant_id" = "worker"
"event.article_id" = "text"
"event.level" = "lvl"
"event.t_ms" = "secs"
"event.y_px" = "scrollY"
"event.phase" = "stage"
"session.participant_id" = "worker"
"session.article_id" = "text"
"session.level" = "lvl"
"session.read_time_ms" = "dwell"
"session.content_height_px" = "height"
"session.answer_1" = "q1"
"session.answer_2" = "q2"
"session.answer_3" = "q3"
"session.score" = "score"
"participant.participant_id" = "worker"
"participant.first_language" = "l1"
"participant.self_proficiency" = "prof"
"participant.age_band" = "age"
"participant.education" = "edu"
"participant.hours_reading_per_week" = "hours"
"participant.locale" = "country"

[options]
time_unit = "s"
answers_one_based = true
phase_reading = "read"
phase_answering = "quiz"
"#;

    fn write_export(dir: &Path) {
        fs::write(
            dir.join("ev.csv"),
            "worker,text,lvl,secs,scrollY,stage\n\
             w1,t1,ADV,0.0,0,read\n\
             w1,t1,ADV,0.1,40,read\n\
             w1,t1,ADV,0.2,90,read\n\
             w1,t1,ADV,95.0,30,quiz\n",
        )
        .unwrap();
        fs::write(
            dir.join("ss.csv"),
            "worker,text,lvl,dwell,height,q1,q2,q3,score\n\
             w1,t1,adv,95.0,5000,1,2,3,1\n\
             w1,t2,ele,92.0,4000,1,1,1,0\n",
        )
        .unwrap();
        fs::write(
            dir.join("pp.csv"),
            "worker,l1,prof,age,edu,hours,country\nw1,Tamil,4,25-34,BSc,3,IN\n",
        )
        .unwrap();
    }

    #[test]
    fn adapts_a_mapped_export() {
        let tmp = tempfile::tempdir().unwrap();
        write_export(tmp.path());
        fs::write(tmp.path().join("map.toml"), MAPPING).unwrap();
        let mapping = AdapterMapping::load(tmp.path().join("map.toml")).unwrap();
        let out = adapt_export(&mapping).unwrap();
        assert_eq!(out.sessions.len(), 2);
        let s = &out.sessions[0];
        assert_eq!(s.level, Level::Advanced);
        assert_eq!(s.reading_events.len(), 3);
        assert_eq!(s.reading_events[1], ScrollEvent::new(100, 40.0));
        assert_eq!(s.answering_events.len(), 1);
        assert_eq!(s.read_time_ms, 95_000);
        assert_eq!(s.answers, vec![0, 1, 2]);
        assert_eq!(s.viewport.height_px, 1920.0);
        assert!(out.sessions[1].reading_events.is_empty());
        let ps = out.participants.unwrap();
        assert_eq!(ps[0].first_language, "Tamil");
        assert_eq!(ps[0].age_band, AgeBand::From25To34);
    }

    #[test]
    fn missing_key_and_unknown_column_are_reported() {
        let text = MAPPING.replace("\"event.y_px\" = \"scrollY\"\n", "");
        let err = AdapterMapping::parse(&text).unwrap_err();
        assert!(err.to_string().contains("event.y_px"), "{err}");

        let tmp = tempfile::tempdir().unwrap();
        write_export(tmp.path());
        let mapping = AdapterMapping::parse(&MAPPING.replace("scrollY", "offset"))
            .unwrap()
            .with_base_dir(tmp.path());
        let err = adapt_export(&mapping).unwrap_err();
        assert!(err.to_string().contains("column `offset`"), "{err}");
    }
}
