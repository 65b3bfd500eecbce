//! Engagement filter: a reading counts only if the participant scrolled and
//! reached at least half of the scrollable range.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::session::{Session, SessionKey};

/// Fraction of the scrollable range a reader must reach (inclusive).
pub const HALFWAY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EngagementReason {
    Ok,
    NoScroll,
    BelowHalfway,
}

impl EngagementReason {
    pub fn as_str(self) -> &'static str {
        match self {
            EngagementReason::Ok => "ok",
            EngagementReason::NoScroll => "no_scroll",
            EngagementReason::BelowHalfway => "below_halfway",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngagementReport {
    pub key: SessionKey,
    pub max_depth_px: f64,
    pub max_depth_fraction: f64,
    pub engaged: bool,
    pub reason: EngagementReason,
}

/// Deepest offset reached while reading; 0 without events.
pub fn max_scroll_depth(session: &Session) -> f64 {
    session.reading_events.iter().map(|e| e.y_px).fold(0.0, f64::max)
}

/// Applies the engagement rule to one session. Answering-phase scrolling is
/// ignored.
pub fn is_engaged(session: &Session) -> Result<EngagementReport> {
    let scrollable = session.viewport.scrollable_height();
    if scrollable <= 0.0 {
        return Err(Error::DegenerateLayout(session.key()));
    }
    let max_depth_px = max_scroll_depth(session);
    let max_depth_fraction = (max_depth_px / scrollable).clamp(0.0, 1.0);
    let reason = if session.reading_events.is_empty() {
        EngagementReason::NoScroll
    } else if max_depth_px >= HALFWAY * scrollable {
        EngagementReason::Ok
    } else {
        EngagementReason::BelowHalfway
    };
    Ok(EngagementReport {
        key: session.key(),
        max_depth_px,
        max_depth_fraction,
        engaged: reason == EngagementReason::Ok,
        reason,
    })
}

/// Result of filtering a batch.
#[derive(Debug, Default)]
pub struct FilterOutcome {
    pub engaged: Vec<Session>,
    pub reports: Vec<EngagementReport>,
    /// Sessions the rule could not be applied to, with their errors.
    pub errors: Vec<(SessionKey, Error)>,
}

impl FilterOutcome {
    pub fn rejected(&self) -> usize {
        self.reports.iter().filter(|r| !r.engaged).count()
    }
}

/// Partitions sessions, preserving input order. Degenerate layouts are
/// collected in `errors` and the batch continues.
pub fn filter_sessions(sessions: &[Session]) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    for s in sessions {
        match is_engaged(s) {
            Ok(report) => {
                if report.engaged {
                    out.engaged.push(s.clone());
                }
                out.reports.push(report);
            }
            Err(e) => out.errors.push((s.key(), e)),
        }
    }
    out
}

/// Keeps only participants whose every reading passed the filter.
pub fn drop_partial_participants(outcome: &FilterOutcome) -> Vec<Session> {
    use std::collections::HashSet;
    let failed: HashSet<&str> = outcome
        .reports
        .iter()
        .filter(|r| !r.engaged)
        .map(|r| r.key.participant_id.as_str())
        .chain(outcome.errors.iter().map(|(k, _)| k.participant_id.as_str()))
        .collect();
    outcome
        .engaged
        .iter()
        .filter(|s| !failed.contains(s.participant_id.as_str()))
        .cloned()
        .collect()
}

/// CSV with columns `participant_id,article_id,level,reason,max_depth_fraction`.
pub fn write_engagement_csv<W: Write>(writer: W, reports: &[EngagementReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::io("<engagement csv>", std::io::Error::other(e));
    w.write_record(["participant_id", "article_id", "level", "reason", "max_depth_fraction"])
        .map_err(io)?;
    for r in reports {
        w.write_record([
            r.key.participant_id.as_str(),
            r.key.article_id.as_str(),
            r.key.level.as_str(),
            r.reason.as_str(),
            &format!("{:.6}", r.max_depth_fraction),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io("<engagement csv>", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::{Level, ScrollEvent, Viewport};
    use proptest::prelude::*;

    fn session(ys: &[f64], content: f64) -> Session {
        Session {
            participant_id: "p".into(),
            article_id: "a".into(),
            level: Level::Elementary,
            viewport: Viewport {
                width_px: 1080.0,
                height_px: 1920.0,
                content_height_px: content,
            },
            reading_events: ys
                .iter()
                .enumerate()
                .map(|(i, &y)| ScrollEvent::new(i as u64 * 100, y))
                .collect(),
            answering_events: vec![],
            read_time_ms: 90_000,
            answers: vec![0, 0, 0],
            score: 0,
        }
    }

    #[test]
    fn max_depth_examples() {
        assert_eq!(max_scroll_depth(&session(&[0.0, 120.0, 80.0, 300.0], 5000.0)), 300.0);
        assert_eq!(max_scroll_depth(&session(&[], 5000.0)), 0.0);
    }

    #[test]
    fn max_depth_of_long_monotone_trace() {
        let ys: Vec<f64> = (0..1000).map(|i| 4500.0 * i as f64 / 999.0).collect();
        let brute = ys.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(brute, 4500.0);
        assert_eq!(max_scroll_depth(&session(&ys, 10_000.0)), brute);
    }

    #[test]
    fn no_events_is_no_scroll() {
        let r = is_engaged(&session(&[], 3920.0)).unwrap();
        assert_eq!(r.reason, EngagementReason::NoScroll);
        assert!(!r.engaged);
    }

    #[test]
    fn halfway_boundary_is_inclusive() {
        // scrollable height 2000
        let below = is_engaged(&session(&[0.0, 999.0], 3920.0)).unwrap();
        assert_eq!(below.reason, EngagementReason::BelowHalfway);
        let at = is_engaged(&session(&[0.0, 1000.0], 3920.0)).unwrap();
        assert_eq!(at.reason, EngagementReason::Ok);
        assert!(at.engaged);
        assert!((at.max_depth_fraction - 0.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_layout_is_an_error() {
        assert!(matches!(
            is_engaged(&session(&[0.0], 1920.0)),
            Err(Error::DegenerateLayout(_))
        ));
    }

    #[test]
    fn answering_scroll_does_not_rescue() {
        let mut s = session(&[0.0, 10.0], 3920.0);
        s.answering_events = vec![ScrollEvent::new(100_000, 2000.0)];
        assert!(!is_engaged(&s).unwrap().engaged);
    }

    #[test]
    fn mixed_batch() {
        assert!(filter_sessions(&[]).reports.is_empty());
        let batch = [
            session(&[0.0, 1500.0], 3920.0),
            session(&[], 3920.0),
            session(&[0.0, 200.0], 3920.0),
        ];
        let out = filter_sessions(&batch);
        assert_eq!(out.engaged.len(), 1);
        assert_eq!(out.reports.len(), 3);
        assert_eq!(out.rejected(), 2);
        assert_eq!(out.reports[1].reason, EngagementReason::NoScroll);
        assert_eq!(out.reports[2].reason, EngagementReason::BelowHalfway);
    }

    #[test]
    fn degenerate_sessions_do_not_stop_the_batch() {
        let batch = [session(&[0.0], 1000.0), session(&[0.0, 1500.0], 3920.0)];
        let out = filter_sessions(&batch);
        assert_eq!(out.errors.len(), 1);
        assert_eq!(out.engaged.len(), 1);
    }

    #[test]
    fn partial_participants_can_be_dropped() {
        let mut a = session(&[0.0, 1500.0], 3920.0);
        a.participant_id = "keep".into();
        let mut b = session(&[0.0, 1500.0], 3920.0);
        b.participant_id = "partial".into();
        let mut c = session(&[], 3920.0);
        c.participant_id = "partial".into();
        c.level = Level::Advanced;
        let out = filter_sessions(&[a, b, c]);
        assert_eq!(out.engaged.len(), 2);
        let kept = drop_partial_participants(&out);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].participant_id, "keep");
    }

    #[test]
    fn report_csv() {
        let out = filter_sessions(&[session(&[0.0, 1000.0], 3920.0)]);
        let mut buf = Vec::new();
        write_engagement_csv(&mut buf, &out.reports).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "participant_id,article_id,level,reason,max_depth_fraction\np,a,elementary,ok,0.500000\n"
        );
    }

    proptest! {
        #[test]
        fn filtering_is_idempotent(depths in proptest::collection::vec(proptest::collection::vec(0.0f64..2000.0, 0..20), 0..20)) {
            let sessions: Vec<Session> = depths.iter().map(|ys| session(ys, 3920.0)).collect();
            let once = filter_sessions(&sessions).engaged;
            let twice = filter_sessions(&once).engaged;
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn appending_events_never_disengages(ys in proptest::collection::vec(0.0f64..2000.0, 1..20), extra in proptest::collection::vec(0.0f64..2000.0, 0..20)) {
            let base = session(&ys, 3920.0);
            let mut all = ys.clone();
            all.extend(extra);
            let longer = session(&all, 3920.0);
            if is_engaged(&base).unwrap().engaged {
                prop_assert!(is_engaged(&longer).unwrap().engaged);
            }
        }
    }
}
