//! Per-text feature rows: scroll measures averaged over the sessions that
//! read each text, joined with text features, and labeled matrices for
//! classification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interaction::{measure_session, normalize, InteractionMeasures, LengthBasis, Measure, NormalizedMeasures};
use crate::session::{AgeBand, CorpusIndex, Level, Participant, Session, SessionKey};
use crate::text::{fmt_num, LengthFeature, TextFeatures};

/// Restricts which participants contribute. Empty filter passes everyone.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SubgroupFilter {
    pub first_languages: Option<BTreeSet<String>>,
    pub age_bands: Option<BTreeSet<AgeBand>>,
    /// Inclusive proficiency range.
    pub proficiency: Option<(i32, i32)>,
}

impl SubgroupFilter {
    pub fn is_empty(&self) -> bool {
        self.first_languages.is_none() && self.age_bands.is_none() && self.proficiency.is_none()
    }

    pub fn age(bands: impl IntoIterator<Item = AgeBand>) -> Self {
        SubgroupFilter {
            age_bands: Some(bands.into_iter().collect()),
            ..Default::default()
        }
    }

    pub fn language(langs: impl IntoIterator<Item = impl Into<String>>) -> Self {
        SubgroupFilter {
            first_languages: Some(langs.into_iter().map(|l| l.into().to_lowercase()).collect()),
            ..Default::default()
        }
    }

    /// Parses `l1=english,tamil;age=25-34;proficiency=3-5`. Empty string is
    /// the identity filter.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut f = SubgroupFilter::default();
        for clause in spec.split(';').map(str::trim).filter(|c| !c.is_empty()) {
            let (key, value) = clause
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("filter clause `{clause}` lacks `=`")))?;
            let values = value.split(',').map(str::trim).filter(|v| !v.is_empty());
            match key.trim() {
                "l1" | "first_language" => {
                    f.first_languages = Some(values.map(str::to_lowercase).collect());
                }
                "age" | "age_band" => {
                    f.age_bands = Some(
                        values
                            .map(|v| v.parse::<AgeBand>().map_err(Error::InvalidArgument))
                            .collect::<Result<_>>()?,
                    );
                }
                "proficiency" => {
                    let (lo, hi) = value.split_once('-').unwrap_or((value, value));
                    let parse = |s: &str| {
                        s.trim()
                            .parse::<i32>()
                            .map_err(|_| Error::InvalidArgument(format!("bad proficiency `{s}`")))
                    };
                    let (lo, hi) = (parse(lo)?, parse(hi)?);
                    if lo > hi {
                        return Err(Error::InvalidArgument(format!("empty proficiency range {lo}-{hi}")));
                    }
                    f.proficiency = Some((lo, hi));
                }
                other => return Err(Error::InvalidArgument(format!("unknown filter key `{other}`"))),
            }
        }
        Ok(f)
    }

    pub fn accepts(&self, p: &Participant) -> bool {
        self.first_languages
            .as_ref()
            .is_none_or(|s| s.contains(&p.first_language.to_lowercase()))
            && self.age_bands.as_ref().is_none_or(|s| s.contains(&p.age_band))
            && self
                .proficiency
                .is_none_or(|(lo, hi)| (lo..=hi).contains(&p.self_proficiency))
    }
}

impl fmt::Display for SubgroupFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(l) = &self.first_languages {
            parts.push(format!("l1={}", l.iter().cloned().collect::<Vec<_>>().join(",")));
        }
        if let Some(a) = &self.age_bands {
            parts.push(format!(
                "age={}",
                a.iter().map(|b| b.as_str()).collect::<Vec<_>>().join(",")
            ));
        }
        if let Some((lo, hi)) = self.proficiency {
            parts.push(format!("proficiency={lo}-{hi}"));
        }
        if parts.is_empty() {
            f.write_str("all")
        } else {
            f.write_str(&parts.join(";"))
        }
    }
}

/// Interaction measures for one session, raw and normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredSession {
    pub session: Session,
    pub raw: InteractionMeasures,
    pub norm: NormalizedMeasures,
}

/// Computes raw and normalized measures for each session. Sessions that
/// cannot be measured (too few events, unknown article) are returned with
/// their error instead of aborting the batch.
pub fn measure_sessions(
    sessions: &[Session],
    corpus: &CorpusIndex<'_>,
    basis: LengthBasis,
) -> (Vec<MeasuredSession>, Vec<(SessionKey, Error)>) {
    let mut measured = Vec::with_capacity(sessions.len());
    let mut errors = Vec::new();
    for s in sessions {
        let result = (|| {
            let raw = measure_session(s)?;
            let length = match basis {
                LengthBasis::WordCount => {
                    corpus
                        .get(&s.article_id, s.level)
                        .ok_or_else(|| Error::Corpus(format!("no article {}/{}", s.article_id, s.level)))?
                        .word_count as f64
                }
                LengthBasis::ContentHeight => s.viewport.content_height_px,
            };
            let norm = normalize(&raw, length)?;
            Ok(MeasuredSession {
                session: s.clone(),
                raw,
                norm,
            })
        })();
        match result {
            Ok(m) => measured.push(m),
            Err(e) => errors.push((s.key(), e)),
        }
    }
    (measured, errors)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub article_id: String,
    pub label: Level,
    /// Means of [`Measure::FEATURES`], raw.
    pub scroll_raw: [f64; 6],
    /// Means of [`Measure::FEATURES`], length-normalized.
    pub scroll_norm: [f64; 6],
    pub text_features: Option<TextFeatures>,
    pub n_sessions: usize,
}

/// Which scroll measures go into a row.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ScrollMeasureSet {
    /// The six measures that differ between levels.
    #[default]
    Enumerated,
    /// Caller-chosen measures, e.g. those found significant at runtime.
    Custom([Measure; 6]),
}

impl ScrollMeasureSet {
    pub fn measures(&self) -> [Measure; 6] {
        match self {
            ScrollMeasureSet::Enumerated => Measure::FEATURES,
            ScrollMeasureSet::Custom(m) => *m,
        }
    }
}

/// Averages measures per `(article_id, level)` over sessions whose
/// participant passes `filter`. Texts left without sessions are skipped
/// with a warning. Rows are sorted by article id then level.
///
/// Sessions whose participant is unknown pass only the empty filter.
pub fn aggregate_by_text(
    sessions: &[MeasuredSession],
    participants: &[Participant],
    filter: &SubgroupFilter,
    measure_set: &ScrollMeasureSet,
) -> Vec<FeatureRow> {
    let by_id: BTreeMap<&str, &Participant> = participants.iter().map(|p| (p.participant_id.as_str(), p)).collect();
    let mut groups: BTreeMap<(&str, Level), Vec<&MeasuredSession>> = BTreeMap::new();
    let mut all_texts: BTreeSet<(&str, Level)> = BTreeSet::new();
    for ms in sessions {
        let key = (ms.session.article_id.as_str(), ms.session.level);
        all_texts.insert(key);
        let pass = filter.is_empty()
            || by_id
                .get(ms.session.participant_id.as_str())
                .is_some_and(|p| filter.accepts(p));
        if pass {
            groups.entry(key).or_default().push(ms);
        }
    }
    for key in all_texts.iter().filter(|k| !groups.contains_key(*k)) {
        log::warn!(
            "text {}/{} has no sessions after filtering ({filter}); excluded",
            key.0,
            key.1
        );
    }
    let measures = measure_set.measures();
    groups
        .into_iter()
        .map(|((article_id, level), members)| {
            let n = members.len() as f64;
            let mean = |f: &dyn Fn(&MeasuredSession) -> f64| members.iter().map(|m| f(m)).sum::<f64>() / n;
            FeatureRow {
                article_id: article_id.to_string(),
                label: level,
                scroll_raw: measures.map(|m| mean(&|s| s.raw.get(m))),
                scroll_norm: measures.map(|m| mean(&|s| s.norm.get(m))),
                text_features: None,
                n_sessions: members.len(),
            }
        })
        .collect()
}

/// Attaches text features to rows by `(article_id, level)`.
pub fn attach_text_features(rows: &mut [FeatureRow], features: &[crate::text::ArticleFeatures]) {
    let by_key: BTreeMap<(&str, Level), &TextFeatures> = features
        .iter()
        .map(|f| ((f.article_id.as_str(), f.level), &f.features))
        .collect();
    for row in rows {
        row.text_features = by_key.get(&(row.article_id.as_str(), row.label)).map(|f| (*f).clone());
    }
}

/// Builds text-only rows (no sessions) for baseline experiments.
pub fn text_only_rows(features: &[crate::text::ArticleFeatures]) -> Vec<FeatureRow> {
    features
        .iter()
        .map(|f| FeatureRow {
            article_id: f.article_id.clone(),
            label: f.level,
            scroll_raw: [f64::NAN; 6],
            scroll_norm: [f64::NAN; 6],
            text_features: Some(f.features.clone()),
            n_sessions: 0,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSelection {
    ScrollAll,
    ScrollRaw,
    ScrollNorm,
    Baseline,
    BaselineScroll,
    BaselineTraditional,
}

impl FeatureSelection {
    pub const ALL: [FeatureSelection; 6] = [
        FeatureSelection::ScrollAll,
        FeatureSelection::ScrollRaw,
        FeatureSelection::ScrollNorm,
        FeatureSelection::Baseline,
        FeatureSelection::BaselineScroll,
        FeatureSelection::BaselineTraditional,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSelection::ScrollAll => "scroll_all",
            FeatureSelection::ScrollRaw => "scroll_raw",
            FeatureSelection::ScrollNorm => "scroll_norm",
            FeatureSelection::Baseline => "baseline",
            FeatureSelection::BaselineScroll => "baseline_scroll",
            FeatureSelection::BaselineTraditional => "baseline_traditional",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.as_str() == s)
    }

    pub fn column_count(self) -> usize {
        match self {
            FeatureSelection::ScrollAll => 12,
            FeatureSelection::ScrollRaw | FeatureSelection::ScrollNorm => 6,
            FeatureSelection::Baseline => 6,
            FeatureSelection::BaselineScroll => 18,
            FeatureSelection::BaselineTraditional => 15,
        }
    }

    fn needs_scroll(self) -> bool {
        !matches!(self, FeatureSelection::Baseline | FeatureSelection::BaselineTraditional)
    }

    fn needs_text(self) -> bool {
        matches!(
            self,
            FeatureSelection::Baseline | FeatureSelection::BaselineScroll | FeatureSelection::BaselineTraditional
        )
    }
}

impl fmt::Display for FeatureSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Dense row-major matrix with aligned labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    pub x: Vec<Vec<f64>>,
    /// `true` for advanced.
    pub y: Vec<bool>,
    pub columns: Vec<String>,
    pub row_keys: Vec<(String, Level)>,
}

pub fn build_matrix(
    rows: &[FeatureRow],
    selection: FeatureSelection,
    length: LengthFeature,
    measure_set: &ScrollMeasureSet,
) -> Result<LabeledMatrix> {
    if rows.is_empty() {
        return Err(Error::InsufficientData("no feature rows".into()));
    }
    let names = measure_set.measures().map(|m| m.name());
    let mut columns: Vec<String> = Vec::new();
    if selection.needs_text() {
        columns.extend(TextFeatures::BASELINE_NAMES.iter().map(|s| s.to_string()));
    }
    if selection == FeatureSelection::BaselineTraditional {
        columns.extend(TextFeatures::TRADITIONAL_NAMES.iter().map(|s| s.to_string()));
    }
    if matches!(
        selection,
        FeatureSelection::ScrollAll | FeatureSelection::ScrollRaw | FeatureSelection::BaselineScroll
    ) {
        columns.extend(names.iter().map(|n| format!("{n}_raw")));
    }
    if matches!(
        selection,
        FeatureSelection::ScrollAll | FeatureSelection::ScrollNorm | FeatureSelection::BaselineScroll
    ) {
        columns.extend(names.iter().map(|n| format!("{n}_norm")));
    }
    debug_assert_eq!(columns.len(), selection.column_count());

    let mut x = Vec::with_capacity(rows.len());
    for row in rows {
        let mut v = Vec::with_capacity(columns.len());
        if selection.needs_text() {
            let tf = row.text_features.as_ref().ok_or(Error::MissingFeatures {
                selection: selection.to_string(),
                missing: "text features",
            })?;
            v.extend(tf.baseline(length));
            if selection == FeatureSelection::BaselineTraditional {
                v.extend(tf.traditional_block());
            }
        }
        if selection.needs_scroll() && row.n_sessions == 0 {
            return Err(Error::MissingFeatures {
                selection: selection.to_string(),
                missing: "scroll measures",
            });
        }
        if matches!(
            selection,
            FeatureSelection::ScrollAll | FeatureSelection::ScrollRaw | FeatureSelection::BaselineScroll
        ) {
            v.extend(row.scroll_raw);
        }
        if matches!(
            selection,
            FeatureSelection::ScrollAll | FeatureSelection::ScrollNorm | FeatureSelection::BaselineScroll
        ) {
            v.extend(row.scroll_norm);
        }
        x.push(v);
    }
    Ok(LabeledMatrix {
        x,
        y: rows.iter().map(|r| r.label == Level::Advanced).collect(),
        columns,
        row_keys: rows.iter().map(|r| (r.article_id.clone(), r.label)).collect(),
    })
}

/// CSV with `article_id,level,label,n_sessions` then one column per feature.
pub fn write_matrix_csv<W: Write>(writer: W, m: &LabeledMatrix, n_sessions: &[usize]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::io("<matrix csv>", std::io::Error::other(e));
    let mut header = vec![
        "article_id".to_string(),
        "level".into(),
        "label".into(),
        "n_sessions".into(),
    ];
    header.extend(m.columns.iter().cloned());
    w.write_record(&header).map_err(io)?;
    for (i, row) in m.x.iter().enumerate() {
        let (id, level) = &m.row_keys[i];
        let mut rec = vec![
            id.clone(),
            level.to_string(),
            (m.y[i] as u8).to_string(),
            n_sessions.get(i).map(|n| n.to_string()).unwrap_or_default(),
        ];
        rec.extend(row.iter().map(|v| fmt_num(*v)));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io("<matrix csv>", e))
}

/// Per-session CSV: session key, score, then all eight measures raw
/// (`<name>`) and normalized (`<name>_norm`).
pub fn write_session_measures_csv<W: Write>(writer: W, sessions: &[MeasuredSession]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::io("<features csv>", std::io::Error::other(e));
    let mut header = vec![
        "participant_id".to_string(),
        "article_id".into(),
        "level".into(),
        "score".into(),
    ];
    header.extend(Measure::ALL.iter().map(|m| m.name().to_string()));
    header.extend(Measure::ALL.iter().map(|m| format!("{}_norm", m.name())));
    w.write_record(&header).map_err(io)?;
    for ms in sessions {
        let s = &ms.session;
        let mut rec = vec![
            s.participant_id.clone(),
            s.article_id.clone(),
            s.level.to_string(),
            s.score.to_string(),
        ];
        rec.extend(ms.raw.values().iter().map(|v| fmt_num(*v)));
        rec.extend(ms.norm.values().iter().map(|v| fmt_num(*v)));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io("<features csv>", e))
}
