//! Scroll-interaction measures computed from a reading trace.
//!
//! Speeds are magnitudes `|Δy| / Δt` in px/ms over consecutive samples whose
//! offset changed; accelerations are differences of consecutive speeds over
//! the later interval (px/ms²) and keep their sign. Direction enters only
//! through the regression count.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::session::{ScrollEvent, Session};

/// One speed sample: `speed` in px/ms over `interval_ms`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedSample {
    pub speed: f64,
    pub interval_ms: f64,
}

/// The eight measures, in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    ReadTime,
    Regressions,
    SpeedMin,
    SpeedMax,
    SpeedAvg,
    AccMin,
    AccMax,
    AccAvg,
}

impl Measure {
    pub const ALL: [Measure; 8] = [
        Measure::ReadTime,
        Measure::Regressions,
        Measure::SpeedMin,
        Measure::SpeedMax,
        Measure::SpeedAvg,
        Measure::AccMin,
        Measure::AccMax,
        Measure::AccAvg,
    ];

    /// The six measures used as classifier features.
    pub const FEATURES: [Measure; 6] = [
        Measure::Regressions,
        Measure::SpeedMax,
        Measure::SpeedAvg,
        Measure::AccMin,
        Measure::AccMax,
        Measure::AccAvg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::ReadTime => "read_time_s",
            Measure::Regressions => "n_regressions",
            Measure::SpeedMin => "speed_min",
            Measure::SpeedMax => "speed_max",
            Measure::SpeedAvg => "speed_avg",
            Measure::AccMin => "acc_min",
            Measure::AccMax => "acc_max",
            Measure::AccAvg => "acc_avg",
        }
    }

    pub fn parse(s: &str) -> Option<Measure> {
        Measure::ALL.into_iter().find(|m| m.name() == s)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteractionMeasures {
    pub read_time_s: f64,
    pub n_regressions: u32,
    pub speed_min: f64,
    pub speed_max: f64,
    pub speed_avg: f64,
    pub acc_min: f64,
    pub acc_max: f64,
    pub acc_avg: f64,
}

impl InteractionMeasures {
    pub fn get(&self, m: Measure) -> f64 {
        match m {
            Measure::ReadTime => self.read_time_s,
            Measure::Regressions => self.n_regressions as f64,
            Measure::SpeedMin => self.speed_min,
            Measure::SpeedMax => self.speed_max,
            Measure::SpeedAvg => self.speed_avg,
            Measure::AccMin => self.acc_min,
            Measure::AccMax => self.acc_max,
            Measure::AccAvg => self.acc_avg,
        }
    }

    pub fn values(&self) -> [f64; 8] {
        Measure::ALL.map(|m| self.get(m))
    }
}

/// Measures divided by a text-length denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizedMeasures {
    pub read_time_s: f64,
    pub n_regressions: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    pub speed_avg: f64,
    pub acc_min: f64,
    pub acc_max: f64,
    pub acc_avg: f64,
}

impl NormalizedMeasures {
    pub fn get(&self, m: Measure) -> f64 {
        match m {
            Measure::ReadTime => self.read_time_s,
            Measure::Regressions => self.n_regressions,
            Measure::SpeedMin => self.speed_min,
            Measure::SpeedMax => self.speed_max,
            Measure::SpeedAvg => self.speed_avg,
            Measure::AccMin => self.acc_min,
            Measure::AccMax => self.acc_max,
            Measure::AccAvg => self.acc_avg,
        }
    }

    pub fn values(&self) -> [f64; 8] {
        Measure::ALL.map(|m| self.get(m))
    }
}

/// What "text length" means when normalizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthBasis {
    #[default]
    WordCount,
    ContentHeight,
}

impl LengthBasis {
    pub fn parse(s: &str) -> Option<LengthBasis> {
        match s {
            "word_count" | "words" => Some(LengthBasis::WordCount),
            "content_height" | "pixels" => Some(LengthBasis::ContentHeight),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LengthBasis::WordCount => "word_count",
            LengthBasis::ContentHeight => "content_height",
        }
    }
}

/// Speed for every consecutive pair whose offset changed.
pub fn pairwise_speeds(events: &[ScrollEvent]) -> Result<Vec<SpeedSample>> {
    if events.len() < 2 {
        return Err(Error::InsufficientEvents {
            session: None,
            message: format!("need at least 2 events for a speed, got {}", events.len()),
        });
    }
    let mut out = Vec::with_capacity(events.len() - 1);
    for (i, w) in events.windows(2).enumerate() {
        if w[1].t_ms <= w[0].t_ms {
            return Err(Error::MalformedStream { index: i });
        }
        let dy = w[1].y_px - w[0].y_px;
        if dy == 0.0 {
            continue;
        }
        let dt = (w[1].t_ms - w[0].t_ms) as f64;
        out.push(SpeedSample {
            speed: dy.abs() / dt,
            interval_ms: dt,
        });
    }
    Ok(out)
}

/// `(s[i+1] - s[i]) / interval[i+1]` for each consecutive speed pair.
pub fn pairwise_accelerations(speeds: &[SpeedSample]) -> Result<Vec<f64>> {
    if speeds.len() < 2 {
        return Err(Error::InsufficientEvents {
            session: None,
            message: format!("need at least 2 speeds for an acceleration, got {}", speeds.len()),
        });
    }
    Ok(speeds
        .windows(2)
        .map(|w| (w[1].speed - w[0].speed) / w[1].interval_ms)
        .collect())
}

/// Number of maximal runs of upward moves. A sustained upward scroll spread
/// over several samples counts once.
pub fn count_regressions(events: &[ScrollEvent]) -> u32 {
    let mut runs = 0;
    let mut in_run = false;
    for w in events.windows(2) {
        let up = w[1].y_px < w[0].y_px;
        if up && !in_run {
            runs += 1;
        }
        in_run = up;
    }
    runs
}

struct Summary {
    min: f64,
    max: f64,
    mean: f64,
}

fn summarize(values: impl Iterator<Item = f64>) -> Option<Summary> {
    let mut n = 0usize;
    let mut sum = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for v in values {
        n += 1;
        sum += v;
        min = min.min(v);
        max = max.max(v);
    }
    (n > 0).then(|| Summary {
        min,
        max,
        // mean of finite values can land a ulp outside [min, max]
        mean: (sum / n as f64).clamp(min, max),
    })
}

/// Measures for a raw trace plus its total reading time.
pub fn measure_events(events: &[ScrollEvent], read_time_ms: u64) -> Result<InteractionMeasures> {
    if events.len() < 3 {
        return Err(Error::InsufficientEvents {
            session: None,
            message: format!("need at least 3 events, got {}", events.len()),
        });
    }
    let speeds = pairwise_speeds(events)?;
    let accs = pairwise_accelerations(&speeds)?;
    let s = summarize(speeds.iter().map(|s| s.speed)).expect("at least two speeds");
    let a = summarize(accs.iter().copied()).expect("at least one acceleration");
    Ok(InteractionMeasures {
        read_time_s: read_time_ms as f64 / 1000.0,
        n_regressions: count_regressions(events),
        speed_min: s.min,
        speed_max: s.max,
        speed_avg: s.mean,
        acc_min: a.min,
        acc_max: a.max,
        acc_avg: a.mean,
    })
}

/// Measures over the reading phase of a session.
pub fn measure_session(session: &Session) -> Result<InteractionMeasures> {
    measure_events(&session.reading_events, session.read_time_ms).map_err(|e| match e {
        Error::InsufficientEvents { message, .. } => Error::InsufficientEvents {
            session: Some(session.key()),
            message,
        },
        other => other,
    })
}

/// Divides every measure by `length` (word count or content height).
pub fn normalize(m: &InteractionMeasures, length: f64) -> Result<NormalizedMeasures> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "normalization length must be positive, got {length}"
        )));
    }
    Ok(NormalizedMeasures {
        read_time_s: m.read_time_s / length,
        n_regressions: m.n_regressions as f64 / length,
        speed_min: m.speed_min / length,
        speed_max: m.speed_max / length,
        speed_avg: m.speed_avg / length,
        acc_min: m.acc_min / length,
        acc_max: m.acc_max / length,
        acc_avg: m.acc_avg / length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trace(points: &[(u64, f64)]) -> Vec<ScrollEvent> {
        points.iter().map(|&(t, y)| ScrollEvent::new(t, y)).collect()
    }

    fn ys(ys: &[f64]) -> Vec<ScrollEvent> {
        ys.iter()
            .enumerate()
            .map(|(i, &y)| ScrollEvent::new(i as u64 * 100, y))
            .collect()
    }

    #[test]
    fn single_pair_speed() {
        let s = pairwise_speeds(&trace(&[(0, 0.0), (100, 50.0)])).unwrap();
        assert_eq!(
            s,
            vec![SpeedSample {
                speed: 0.5,
                interval_ms: 100.0
            }]
        );
    }

    #[test]
    fn idle_pairs_are_skipped_and_upward_speed_is_positive() {
        let s = pairwise_speeds(&trace(&[(0, 0.0), (100, 50.0), (200, 50.0), (300, 20.0)])).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].speed, 0.5);
        assert!((s[1].speed - 0.3).abs() < 1e-15);
        assert_eq!(s[1].interval_ms, 100.0);
    }

    #[test]
    fn speed_errors() {
        assert!(matches!(
            pairwise_speeds(&trace(&[(0, 0.0)])),
            Err(Error::InsufficientEvents { .. })
        ));
        assert!(matches!(
            pairwise_speeds(&trace(&[(100, 0.0), (100, 5.0)])),
            Err(Error::MalformedStream { index: 0 })
        ));
    }

    #[test]
    fn acceleration_examples() {
        let sp = |s: f64| SpeedSample {
            speed: s,
            interval_ms: 100.0,
        };
        let a = pairwise_accelerations(&[sp(0.5), sp(0.7)]).unwrap();
        assert!((a[0] - 0.002).abs() < 1e-15);
        let a = pairwise_accelerations(&[sp(0.7), sp(0.5)]).unwrap();
        assert!((a[0] + 0.002).abs() < 1e-15);
        let a = pairwise_accelerations(&[sp(0.4), sp(0.4), sp(0.4)]).unwrap();
        assert_eq!(a, vec![0.0, 0.0]);
        assert!(pairwise_accelerations(&[sp(0.4)]).is_err());
    }

    #[test]
    fn acceleration_uses_later_interval() {
        let s = [
            SpeedSample {
                speed: 0.2,
                interval_ms: 100.0,
            },
            SpeedSample {
                speed: 0.6,
                interval_ms: 200.0,
            },
        ];
        assert!((pairwise_accelerations(&s).unwrap()[0] - 0.002).abs() < 1e-15);
    }

    #[test]
    fn regression_runs() {
        assert_eq!(count_regressions(&ys(&[0.0, 10.0, 10.0, 40.0])), 0);
        assert_eq!(count_regressions(&ys(&[0.0, 100.0, 60.0, 40.0, 200.0])), 1);
        assert_eq!(count_regressions(&ys(&[0.0, 100.0, 60.0, 200.0, 150.0, 300.0])), 2);
        assert_eq!(count_regressions(&ys(&[5.0])), 0);
    }

    #[test]
    fn regression_runs_match_brute_force() {
        // Brute force: count indices where an upward pair starts, i.e. the
        // pair is upward and the previous pair (if any) is not.
        let seq = [0.0, 100.0, 60.0, 200.0, 150.0, 300.0];
        let ups: Vec<bool> = seq.windows(2).map(|w| w[1] < w[0]).collect();
        let brute = (0..ups.len()).filter(|&i| ups[i] && (i == 0 || !ups[i - 1])).count();
        assert_eq!(brute, 2);
        assert_eq!(count_regressions(&ys(&seq)) as usize, brute);
    }

    #[test]
    fn hand_computed_session() {
        let m = measure_events(&trace(&[(0, 0.0), (100, 50.0), (200, 150.0)]), 90_000).unwrap();
        assert_eq!(m.speed_min, 0.5);
        assert_eq!(m.speed_max, 1.0);
        assert_eq!(m.speed_avg, 0.75);
        assert!((m.acc_min - 0.005).abs() < 1e-15);
        assert_eq!(m.acc_min, m.acc_max);
        assert_eq!(m.acc_min, m.acc_avg);
        assert_eq!(m.n_regressions, 0);
        assert_eq!(m.read_time_s, 90.0);
    }

    #[test]
    fn too_few_events_carry_session_key() {
        let s = Session {
            participant_id: "p9".into(),
            article_id: "a".into(),
            level: crate::Level::Advanced,
            viewport: crate::session::Viewport {
                width_px: 1.0,
                height_px: 1.0,
                content_height_px: 2.0,
            },
            reading_events: trace(&[(0, 0.0), (100, 5.0)]),
            answering_events: vec![],
            read_time_ms: 100,
            answers: vec![0, 0, 0],
            score: 0,
        };
        let err = measure_session(&s).unwrap_err();
        assert!(err.to_string().contains("p9/a/advanced"), "{err}");
    }

    #[test]
    fn normalize_examples() {
        let m = measure_events(&trace(&[(0, 0.0), (100, 50.0), (200, 150.0)]), 300_000).unwrap();
        let n = normalize(&m, 600.0).unwrap();
        assert_eq!(n.read_time_s, 0.5);
        let id = normalize(&m, 1.0).unwrap();
        assert_eq!(id.values(), m.values());
        assert!(normalize(&m, 0.0).is_err());
        assert!(normalize(&m, -3.0).is_err());
    }

    fn arb_trace() -> impl Strategy<Value = Vec<ScrollEvent>> {
        proptest::collection::vec((1u64..500, -300.0f64..600.0), 3..60).prop_map(|steps| {
            let mut t = 0;
            let mut y = 5000.0;
            let mut out = vec![ScrollEvent::new(0, y)];
            for (dt, dy) in steps {
                t += dt;
                y = (y + dy).max(0.0);
                out.push(ScrollEvent::new(t, y));
            }
            out
        })
    }

    proptest! {
        #[test]
        fn invariants_hold(tr in arb_trace()) {
            if let Ok(m) = measure_events(&tr, tr.last().unwrap().t_ms) {
                prop_assert!(0.0 <= m.speed_min && m.speed_min <= m.speed_avg && m.speed_avg <= m.speed_max);
                prop_assert!(m.acc_min <= m.acc_avg && m.acc_avg <= m.acc_max);
                prop_assert!((m.n_regressions as usize) < tr.len());
            }
        }

        #[test]
        fn shift_invariance(tr in arb_trace(), dt in 0u64..100_000, dy in 0.0f64..10_000.0) {
            let shifted: Vec<_> = tr.iter().map(|e| ScrollEvent::new(e.t_ms + dt, e.y_px + dy)).collect();
            let read = tr.last().unwrap().t_ms;
            let a = measure_events(&tr, read);
            let b = measure_events(&shifted, read);
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    prop_assert_eq!(a.n_regressions, b.n_regressions);
                    prop_assert_eq!(a.read_time_s, b.read_time_s);
                    // adding dy to both endpoints perturbs Δy by rounding only
                    for (x, y) in a.values().iter().zip(b.values()) {
                        prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0), "{} vs {}", x, y);
                    }
                }
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
            }
        }

        #[test]
        fn offset_scaling(tr in arb_trace(), k in 0.1f64..10.0) {
            let scaled: Vec<_> = tr.iter().map(|e| ScrollEvent::new(e.t_ms, e.y_px * k)).collect();
            let read = tr.last().unwrap().t_ms;
            if let (Ok(a), Ok(b)) = (measure_events(&tr, read), measure_events(&scaled, read)) {
                prop_assert_eq!(a.n_regressions, b.n_regressions);
                prop_assert_eq!(a.read_time_s, b.read_time_s);
                for m in [Measure::SpeedMin, Measure::SpeedMax, Measure::SpeedAvg, Measure::AccMin, Measure::AccMax, Measure::AccAvg] {
                    let (x, y) = (a.get(m) * k, b.get(m));
                    prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1e-9), "{}: {} vs {}", m, x, y);
                }
            }
        }

        #[test]
        fn normalization_reconstructs(tr in arb_trace(), words in 1usize..3000) {
            if let Ok(m) = measure_events(&tr, tr.last().unwrap().t_ms) {
                let n = normalize(&m, words as f64).unwrap();
                for (raw, norm) in m.values().iter().zip(n.values()) {
                    prop_assert!((norm * words as f64 - raw).abs() <= 1e-12 * raw.abs().max(1e-12));
                }
            }
        }
    }
}
