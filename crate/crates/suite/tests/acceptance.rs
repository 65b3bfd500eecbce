//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.
//!
//! Criteria on the real reading study need its data: set `READSCROLL_DATA`
//! to a directory holding `corpus/`, `participants.csv`, `lexicon.csv` and
//! either `sessions.jsonl` or `mapping.toml` (a foreign export). Without it
//! those criteria fail with "dataset not available".

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use readscroll_core::aggregate::{
    aggregate_by_text, attach_text_features, measure_sessions, FeatureRow, FeatureSelection, MeasuredSession,
    ScrollMeasureSet, SubgroupFilter,
};
use readscroll_core::classifier::{seed_averaged, CvConfig};
use readscroll_core::engagement::filter_sessions;
use readscroll_core::interaction::{measure_events, InteractionMeasures, LengthBasis, Measure};
use readscroll_core::session::{
    adapt_export, fill_scores, load_aoa_lexicon, load_corpus, load_participants, read_sessions, AdapterMapping,
    CorpusIndex, Participant, ProficiencyRange,
};
use readscroll_core::stats::{cohort_summary, l1_correlates, sign_flip_p_value, table1, Table1Config, Table1Row};
use readscroll_core::text::{
    article_features, flesch_kincaid_grade, lexical_richness, traditional_features, ArticleFeatures,
};
use readscroll_core::{ScrollEvent, Session};

const ALPHA: f64 = 0.01;

struct Outcome {
    pass: bool,
    detail: String,
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        pass: false,
        detail: detail.into(),
    }
}

fn verdict(ok: bool, detail: String) -> Outcome {
    Outcome { pass: ok, detail }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

// ---------------------------------------------------------------- measures

fn trace(points: &[(u64, f64)]) -> Vec<ScrollEvent> {
    points.iter().map(|&(t, y)| ScrollEvent::new(t, y)).collect()
}

fn hand_fixtures() -> Vec<(Vec<ScrollEvent>, u64, [f64; 8])> {
    vec![
        (
            // a flat step and one upward move
            trace(&[
                (0, 0.0),
                (100, 50.0),
                (200, 150.0),
                (300, 120.0),
                (400, 120.0),
                (500, 300.0),
            ]),
            60_000,
            [
                60.0,
                1.0,
                0.3,
                1.8,
                (0.5 + 1.0 + 0.3 + 1.8) / 4.0,
                -0.007,
                0.015,
                (0.005 - 0.007 + 0.015) / 3.0,
            ],
        ),
        (
            // uneven intervals, a two-sample upward run and a second single one
            trace(&[
                (0, 0.0),
                (50, 100.0),
                (150, 300.0),
                (200, 250.0),
                (260, 190.0),
                (400, 400.0),
                (500, 350.0),
                (1000, 350.0),
            ]),
            1_000,
            [
                1.0,
                2.0,
                0.5,
                2.0,
                (2.0 + 2.0 + 1.0 + 1.0 + 1.5 + 0.5) / 6.0,
                -0.02,
                0.5 / 140.0,
                (0.0 - 0.02 + 0.0 + 0.5 / 140.0 - 0.01) / 5.0,
            ],
        ),
        (
            trace(&[(0, 0.0), (100, 100.0), (300, 500.0)]),
            2_500,
            [2.5, 0.0, 1.0, 2.0, 1.5, 0.005, 0.005, 0.005],
        ),
        (
            // downward only, constant speed
            trace(&[(0, 900.0), (10, 800.0), (20, 700.0), (30, 600.0), (40, 650.0)]),
            40,
            [
                0.04,
                1.0,
                5.0,
                10.0,
                (10.0 + 10.0 + 10.0 + 5.0) / 4.0,
                -0.5,
                0.0,
                -0.5 / 3.0,
            ],
        ),
    ]
}

/// Straight single pass over the trace with running sums.
fn oracle(events: &[ScrollEvent], read_time_ms: u64) -> [f64; 8] {
    let mut runs = 0.0;
    let mut prev_up = false;
    let mut prev_speed: Option<f64> = None;
    let (mut s_min, mut s_max, mut s_sum, mut s_n) = (f64::MAX, f64::MIN, 0.0, 0.0);
    let (mut a_min, mut a_max, mut a_sum, mut a_n) = (f64::MAX, f64::MIN, 0.0, 0.0);
    for i in 1..events.len() {
        let dy = events[i].y_px - events[i - 1].y_px;
        let dt = (events[i].t_ms - events[i - 1].t_ms) as f64;
        let up = dy < 0.0;
        if up && !prev_up {
            runs += 1.0;
        }
        prev_up = up;
        if dy == 0.0 {
            continue;
        }
        let v = dy.abs() / dt;
        s_min = s_min.min(v);
        s_max = s_max.max(v);
        s_sum += v;
        s_n += 1.0;
        if let Some(p) = prev_speed {
            let a = (v - p) / dt;
            a_min = a_min.min(a);
            a_max = a_max.max(a);
            a_sum += a;
            a_n += 1.0;
        }
        prev_speed = Some(v);
    }
    [
        read_time_ms as f64 / 1000.0,
        runs,
        s_min,
        s_max,
        s_sum / s_n,
        a_min,
        a_max,
        a_sum / a_n,
    ]
}

fn values(m: &InteractionMeasures) -> [f64; 8] {
    m.values()
}

fn random_trace(rng: &mut ChaCha8Rng, n: usize) -> Vec<ScrollEvent> {
    let mut t = 0u64;
    let mut y = 0.0f64;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(ScrollEvent::new(t, y));
        t += rng.gen_range(1..250);
        let r: f64 = rng.gen();
        y = if r < 0.15 {
            y
        } else if r < 0.35 {
            (y - rng.gen_range(1.0..400.0)).max(0.0)
        } else {
            y + rng.gen_range(0.5..300.0)
        };
    }
    out
}

fn measure_exactness() -> Outcome {
    for (i, (events, read_ms, want)) in hand_fixtures().into_iter().enumerate() {
        let got = match measure_events(&events, read_ms) {
            Ok(m) => values(&m),
            Err(e) => return fail(format!("fixture {i}: {e}")),
        };
        for (j, m) in Measure::ALL.iter().enumerate() {
            if (got[j] - want[j]).abs() > 1e-12 {
                return fail(format!("fixture {i} {}: {} vs hand {}", m.name(), got[j], want[j]));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let traces: Vec<Vec<ScrollEvent>> = (0..100).map(|_| random_trace(&mut rng, 10_000)).collect();
    let start = Instant::now();
    let measured: Vec<_> = traces.iter().map(|t| measure_events(t, 600_000)).collect();
    let elapsed = start.elapsed().as_secs_f64();
    let mut worst = 0.0f64;
    for (t, m) in traces.iter().zip(measured) {
        let got = match m {
            Ok(m) => values(&m),
            Err(e) => return fail(format!("random trace: {e}")),
        };
        let want = oracle(t, 600_000);
        for j in 0..8 {
            if !close(got[j], want[j], 1e-12) {
                return fail(format!(
                    "random trace {}: {} vs oracle {}",
                    Measure::ALL[j].name(),
                    got[j],
                    want[j]
                ));
            }
            worst = worst.max((got[j] - want[j]).abs() / want[j].abs().max(1.0));
        }
    }
    verdict(
        elapsed < 1.0,
        format!("4 hand fixtures at 1e-12, 100 x 1e4-event traces max rel diff {worst:.1e}, {elapsed:.3} s (< 1 s)"),
    )
}

// ---------------------------------------------------------------- lexical

fn lexical_formulas() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..50 {
        let vocab = rng.gen_range(2..400);
        let n = rng.gen_range(vocab.max(3)..3000);
        let tokens: Vec<String> = (0..n).map(|_| format!("w{}", rng.gen_range(0..vocab))).collect();
        let t = tokens.iter().collect::<HashSet<_>>().len() as f64;
        let nf = n as f64;
        let got = match lexical_richness(&tokens) {
            Ok(r) => r,
            Err(e) => return fail(format!("multiset {trial}: {e}")),
        };
        let want = [t / nf, t / nf.sqrt(), t / (2.0 * nf).sqrt(), t.ln() / nf.ln()];
        let have = [got.ttr, got.root_ttr, got.corrected_ttr, got.bilog_ttr];
        for (h, w) in have.iter().zip(want) {
            if (h - w).abs() > 1e-9 {
                return fail(format!("multiset {trial}: {h} vs {w}"));
            }
        }
        let uber = (t < nf).then(|| t.ln().powi(2) / (nf / t).ln());
        match (got.uber, uber) {
            (Some(h), Some(w)) if (h - w).abs() <= 1e-9 => {}
            (None, None) => {}
            (h, w) => return fail(format!("multiset {trial} uber: {h:?} vs {w:?}")),
        }
    }
    // 12 words, 2 sentences, 13 syllables ("away" has two)
    let text = "The cat sat on the mat. A big dog ran far away.";
    let want = 0.39 * (12.0 / 2.0) + 11.8 * (13.0 / 12.0) - 15.59;
    let got = match traditional_features(text) {
        Ok(f) => f.flesch_kincaid,
        Err(e) => return fail(format!("grade fixture: {e}")),
    };
    let direct = flesch_kincaid_grade(100.0, 5.0, 150.0);
    let ok = (got - want).abs() <= 1e-9 && (direct - 9.91).abs() <= 1e-9;
    verdict(
        ok,
        format!("50 multisets at 1e-9; grade fixture {got:.12} vs hand {want:.12}"),
    )
}

// ------------------------------------------------------------ permutation

fn significance_sanity() -> Outcome {
    let n_perm = 2000;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let shifted = Normal::new(1.0, 1.0).unwrap();
    let null = Normal::new(0.0, 1.0).unwrap();
    let mut power = 0;
    let mut false_pos = 0;
    for trial in 0..100u64 {
        let d: Vec<f64> = (0..100).map(|_| shifted.sample(&mut rng)).collect();
        if sign_flip_p_value(&d, n_perm, trial, 1).0 < 0.01 {
            power += 1;
        }
        let d: Vec<f64> = (0..100).map(|_| null.sample(&mut rng)).collect();
        if sign_flip_p_value(&d, n_perm, 1000 + trial, 1).0 < 0.05 {
            false_pos += 1;
        }
    }
    verdict(
        power >= 95 && (1..=10).contains(&false_pos),
        format!("1 sd shift rejected in {power}/100 at 0.01 (need >= 95); null rejected in {false_pos}/100 at 0.05 (need 1..10)"),
    )
}

// ------------------------------------------------------------ determinism

fn readscroll(out: &Path, args: &[&str]) -> Result<(), String> {
    let out = out.display().to_string();
    let argv = ["readscroll", "--out", &out].into_iter().chain(args.iter().copied());
    readscroll_cli::execute(argv).map(|_| ()).map_err(|e| e.to_string())
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| {
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let data = d.join("data");
    let synth = [
        "synth",
        "--n-participants",
        "60",
        "--n-articles",
        "10",
        "--n-disengaged",
        "8",
        "--seed",
        "4",
    ];
    if let Err(e) = readscroll(&data, &synth) {
        return fail(format!("synth: {e}"));
    }
    let arg = |p: &str| data.join(p).display().to_string();
    let (corpus, sessions, participants, lexicon) = (
        arg("corpus"),
        arg("sessions.jsonl"),
        arg("participants.csv"),
        arg("lexicon.csv"),
    );
    let base = [
        "report",
        "--corpus",
        &corpus,
        "--sessions",
        &sessions,
        "--participants",
        &participants,
        "--lexicon",
        &lexicon,
        "--k",
        "5",
        "--n-permutations",
        "2000",
        "--seed",
        "11",
    ];
    let runs: [(&str, Vec<&str>); 3] = [
        ("a", base.to_vec()),
        ("b", base.to_vec()),
        ("c", base.iter().copied().chain(["--jobs", "4"]).collect()),
    ];
    let mut snaps = Vec::new();
    for (name, args) in &runs {
        let out = d.join(name);
        if let Err(e) = readscroll(&out, args) {
            return fail(format!("report: {e}"));
        }
        snaps.push(snapshot(&out));
    }
    let n = snaps[0].len();
    verdict(
        n == 6 && snaps[0] == snaps[1] && snaps[0] == snaps[2],
        format!("{n} artifacts byte-identical across repeated runs and --jobs 1 vs 4"),
    )
}

// ------------------------------------------------------------- real data

struct Study {
    measured: Vec<MeasuredSession>,
    participants: Vec<Participant>,
    features: Vec<ArticleFeatures>,
}

fn load_study(dir: &Path) -> Result<Study, String> {
    let e = |e: readscroll_core::Error| e.to_string();
    let articles = load_corpus(dir.join("corpus")).map_err(e)?;
    let index = CorpusIndex::new(&articles);
    let mapping = dir.join("mapping.toml");
    let (sessions, mut participants): (Vec<Session>, Option<Vec<Participant>>) = if mapping.is_file() {
        let mut export = adapt_export(&AdapterMapping::load(&mapping).map_err(e)?).map_err(e)?;
        if !export.scores_provided {
            fill_scores(&mut export.sessions, &index).map_err(e)?;
        }
        (export.sessions, export.participants)
    } else {
        let file = fs::File::open(dir.join("sessions.jsonl")).map_err(|e| e.to_string())?;
        (read_sessions(file).map_err(e)?.0, None)
    };
    readscroll_core::session::validate_scores(&sessions, &index).map_err(e)?;
    let p_csv = dir.join("participants.csv");
    if p_csv.is_file() {
        participants = Some(load_participants(&p_csv, ProficiencyRange { min: 1, max: 5 }).map_err(e)?);
    }
    let lexicon = load_aoa_lexicon(dir.join("lexicon.csv")).map_err(e)?;
    let features = article_features(&articles, Some(&lexicon)).map_err(e)?;
    let engaged = filter_sessions(&sessions).engaged;
    let (measured, _) = measure_sessions(&engaged, &index, LengthBasis::WordCount);
    Ok(Study {
        measured,
        participants: participants.unwrap_or_default(),
        features,
    })
}

fn study_table(s: &Study) -> Result<Vec<Table1Row>, String> {
    let cfg = Table1Config {
        n_permutations: 10_000,
        ..Table1Config::default()
    };
    table1(&s.measured, &cfg).map_err(|e| e.to_string())
}

fn table1_directions(s: &Study) -> Outcome {
    let rows = match study_table(s) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let mut failed = Vec::new();
    let mut checks = 0;
    for row in &rows {
        let (e, a) = (&row.elementary, &row.advanced);
        let name = row.measure.name();
        let dir_ok = match row.measure {
            Measure::ReadTime => e.mean > a.mean,
            Measure::Regressions => a.mean > e.mean,
            _ => a.mean.abs() < e.mean.abs(),
        };
        checks += 2;
        if !dir_ok {
            failed.push(format!("{name} mean"));
        }
        if e.sd <= a.sd {
            failed.push(format!("{name} sd"));
        }
    }
    verdict(
        failed.is_empty(),
        format!(
            "{}/{checks} directional checks hold{}",
            checks - failed.len(),
            listing(&failed)
        ),
    )
}

fn listing(failed: &[String]) -> String {
    if failed.is_empty() {
        String::new()
    } else {
        format!("; failing: {}", failed.join(", "))
    }
}

fn correlation_reproduction(s: &Study) -> Outcome {
    let rows = match study_table(s) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let Some(row) = rows.iter().find(|r| r.measure == Measure::SpeedAvg) else {
        return fail("no speed_avg row");
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for (level, cell, target) in [
        ("elementary", &row.elementary, -0.35),
        ("advanced", &row.advanced, -0.26),
    ] {
        match (cell.r, cell.p_adjusted) {
            (Some(r), Some(p)) => {
                ok &= r < 0.0 && (r - target).abs() <= 0.10 && p < ALPHA;
                parts.push(format!("{level} r={r:.3} (target {target} +/- 0.10) p_adj={p:.2e}"));
            }
            _ => {
                ok = false;
                parts.push(format!("{level} correlation undefined"));
            }
        }
    }
    verdict(ok, parts.join("; "))
}

fn study_rows(s: &Study, filter: &SubgroupFilter) -> Vec<FeatureRow> {
    let mut rows = aggregate_by_text(&s.measured, &s.participants, filter, &ScrollMeasureSet::Enumerated);
    attach_text_features(&mut rows, &s.features);
    rows
}

fn classifier_suite(s: &Study) -> Outcome {
    let start = Instant::now();
    let seeds = [0, 1, 2, 3, 4];
    let cfg = CvConfig::default();
    let all = study_rows(s, &SubgroupFilter::default());
    let age = match SubgroupFilter::parse("age=25-34") {
        Ok(f) => study_rows(s, &f),
        Err(e) => return fail(e.to_string()),
    };
    let f = |rows: &[FeatureRow], sel: FeatureSelection| {
        seed_averaged(rows, sel, &ScrollMeasureSet::Enumerated, &cfg, &seeds).map(|s| s.f1)
    };
    let scores = (|| -> readscroll_core::Result<[f64; 5]> {
        Ok([
            f(&all, FeatureSelection::ScrollAll)?,
            f(&all, FeatureSelection::Baseline)?,
            f(&all, FeatureSelection::BaselineScroll)?,
            f(&all, FeatureSelection::ScrollNorm)?,
            f(&age, FeatureSelection::ScrollAll)?,
        ])
    })();
    let [scroll, base, both, norm, sub] = match scores {
        Ok(v) => v,
        Err(e) => return fail(e.to_string()),
    };
    let secs = start.elapsed().as_secs_f64();
    let ok =
        scroll >= 0.70 && base >= 0.83 && both >= 0.90 && both > base && base > norm && sub > scroll && secs < 60.0;
    verdict(
        ok,
        format!(
            "scroll_all {scroll:.3} (>= 0.70), baseline {base:.3} (>= 0.83), baseline_scroll {both:.3} (>= 0.90), scroll_norm {norm:.3}, age 25-34 scroll_all {sub:.3}, {secs:.1} s"
        ),
    )
}

fn significant(s: &Study, l1: &str) -> Result<Vec<String>, String> {
    let rows = l1_correlates(&s.measured, &s.participants, &s.features, l1).map_err(|e| e.to_string())?;
    Ok(rows
        .into_iter()
        .filter(|r| r.p_adjusted < ALPHA)
        .map(|r| r.name)
        .collect())
}

fn subjective_suite(s: &Study) -> Outcome {
    let (english, tamil) = match (significant(s, "english"), significant(s, "tamil")) {
        (Ok(e), Ok(t)) => (e, t),
        (Err(e), _) | (_, Err(e)) => return fail(e),
    };
    let (Some(en), Some(ta)) = (
        cohort_summary(&s.measured, &s.participants, "english"),
        cohort_summary(&s.measured, &s.participants, "tamil"),
    ) else {
        return fail("english or tamil cohort empty");
    };
    let mut failed = Vec::new();
    if english != ["speed_avg"] {
        failed.push(format!("english significant {english:?}"));
    }
    if tamil != ["mean_aoa_tokens", "speed_avg", "mean_aoa_lemmas"] {
        failed.push(format!("tamil significant {tamil:?}"));
    }
    if en.mean_score <= ta.mean_score {
        failed.push("score order".into());
    }
    if !(en.mean_speed > ta.mean_speed && en.median_speed > ta.median_speed) {
        failed.push("speed order".into());
    }
    for (what, got, want) in [
        ("english mean speed", en.mean_speed, 0.50),
        ("english median speed", en.median_speed, 0.47),
        ("tamil mean speed", ta.mean_speed, 0.46),
        ("tamil median speed", ta.median_speed, 0.37),
    ] {
        if (got - want).abs() > 0.05 {
            failed.push(format!("{what} {got:.3} vs {want}"));
        }
    }
    verdict(
        failed.is_empty(),
        format!(
            "english score {:.2} speed {:.3}/{:.3}, tamil score {:.2} speed {:.3}/{:.3}{}",
            en.mean_score,
            en.mean_speed,
            en.median_speed,
            ta.mean_score,
            ta.mean_speed,
            ta.median_speed,
            listing(&failed)
        ),
    )
}

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() -> ExitCode {
    let data: Option<PathBuf> = std::env::var_os("READSCROLL_DATA").map(PathBuf::from);
    let study = data.as_deref().map(load_study);
    let study = &study;
    let with_study = |check: fn(&Study) -> Outcome| {
        move || match &study {
            None => fail("dataset not available (set READSCROLL_DATA)"),
            Some(Err(e)) => fail(format!("dataset failed to load: {e}")),
            Some(Ok(s)) => check(s),
        }
    };
    let criteria: Vec<(&str, Check)> = vec![
        ("measure_exactness", Box::new(measure_exactness)),
        ("table1_directions", Box::new(with_study(table1_directions))),
        (
            "correlation_reproduction",
            Box::new(with_study(correlation_reproduction)),
        ),
        ("classifier_suite", Box::new(with_study(classifier_suite))),
        ("lexical_formulas", Box::new(lexical_formulas)),
        ("significance_sanity", Box::new(significance_sanity)),
        ("subjective_suite", Box::new(with_study(subjective_suite))),
        ("determinism", Box::new(determinism)),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let o = check();
        if !o.pass {
            failures += 1;
        }
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("{failures} of 8 criteria failed");
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
