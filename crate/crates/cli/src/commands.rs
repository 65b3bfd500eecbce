use std::fmt::Write as _;
use std::fs::File;

use log::warn;
use readscroll_core::aggregate::{
    aggregate_by_text, attach_text_features, build_matrix, measure_sessions, write_matrix_csv,
    write_session_measures_csv, FeatureRow, FeatureSelection, MeasuredSession, ScrollMeasureSet, SubgroupFilter,
};
use readscroll_core::classifier::{evaluate, CvConfig, CvReport};
use readscroll_core::engagement::{
    drop_partial_participants, filter_sessions, write_engagement_csv, EngagementReason, FilterOutcome,
};
use readscroll_core::session::{
    adapt_export, fill_scores, load_aoa_lexicon, load_corpus, load_participants, questions_tsv, read_sessions,
    write_aoa_lexicon, write_participants, write_sessions, AdapterMapping, AoALexicon, Article, CorpusIndex,
    IngestReport, Participant, ProficiencyRange,
};
use readscroll_core::stats::{
    cohort_summary, l1_correlates, proficiency_speed_correlation, score_by_proficiency, speed_distribution, table1,
    write_histograms_csv, write_proficiency_csv, write_table1_csv, GroupBy, Table1Config, Table1Row,
};
use readscroll_core::synthetic::{generate_cohort, CohortConfig};
use readscroll_core::text::{article_features, write_text_features_csv, ArticleFeatures};
use readscroll_core::{Error, Session};

use crate::fail::CliError;
use crate::output::Artifact;
use crate::params::{Params, SynthParams};

type Result<T> = std::result::Result<T, CliError>;

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> readscroll_core::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| CliError::internal(e.to_string()))?;
    Ok(buf)
}

struct Readings {
    sessions: Vec<Session>,
    participants: Option<Vec<Participant>>,
    ingest: IngestReport,
}

fn load_readings(p: &Params) -> Result<Readings> {
    let range = ProficiencyRange {
        min: p.proficiency_min,
        max: p.proficiency_max,
    };
    let mut r = if let Some(mapping) = &p.mapping {
        let mut export = adapt_export(&AdapterMapping::load(mapping)?)?;
        if !export.scores_provided {
            let articles = load_corpus(p.require("--corpus (the export has no score column)", &p.corpus)?)?;
            fill_scores(&mut export.sessions, &CorpusIndex::new(&articles))?;
        }
        Readings {
            sessions: export.sessions,
            participants: export.participants,
            ingest: export.report,
        }
    } else {
        let path = p.require("--sessions or --mapping", &p.sessions)?;
        let file = File::open(path).map_err(|e| CliError::data("io", format!("{}: {e}", path.display())))?;
        let (sessions, ingest) = read_sessions(file)?;
        Readings {
            sessions,
            participants: None,
            ingest,
        }
    };
    if let Some(path) = &p.participants {
        r.participants = Some(load_participants(path, range)?);
    }
    if r.ingest.clamped_offsets > 0 {
        warn!(
            "{} scroll offsets above the scrollable maximum were clamped",
            r.ingest.clamped_offsets
        );
    }
    Ok(r)
}

fn load_articles(p: &Params) -> Result<Vec<Article>> {
    Ok(load_corpus(p.require("--corpus", &p.corpus)?)?)
}

fn load_lexicon(p: &Params) -> Result<Option<AoALexicon>> {
    Ok(p.lexicon.as_ref().map(load_aoa_lexicon).transpose()?)
}

struct Engaged {
    outcome: FilterOutcome,
    sessions: Vec<Session>,
}

fn engaged(p: &Params, sessions: &[Session]) -> Engaged {
    let outcome = filter_sessions(sessions);
    for (key, e) in &outcome.errors {
        warn!("session {key} excluded: {e}");
    }
    let sessions = if p.drop_partial_participants {
        drop_partial_participants(&outcome)
    } else {
        outcome.engaged.clone()
    };
    Engaged { outcome, sessions }
}

fn measured(p: &Params, sessions: &[Session], articles: &[Article]) -> Result<Vec<MeasuredSession>> {
    let index = CorpusIndex::new(articles);
    let (out, errors) = measure_sessions(sessions, &index, p.length_basis);
    for (key, e) in &errors {
        if let Error::Corpus(_) = e {
            return Err(CliError::from(Error::Corpus(format!("session {key}: {e}"))));
        }
        warn!("session {key} not measured: {e}");
    }
    Ok(out)
}

/// Everything downstream of ingest, computed once per invocation.
struct Pipeline {
    readings: Readings,
    engaged: Engaged,
    measured: Vec<MeasuredSession>,
    features: Vec<ArticleFeatures>,
}

impl Pipeline {
    fn run(p: &Params, need_text: bool) -> Result<Self> {
        let readings = load_readings(p)?;
        let articles = load_articles(p)?;
        readings_match_corpus(&readings.sessions, &articles)?;
        let features = if need_text {
            article_features(&articles, load_lexicon(p)?.as_ref())?
        } else {
            Vec::new()
        };
        let engaged = engaged(p, &readings.sessions);
        let measured = measured(p, &engaged.sessions, &articles)?;
        Ok(Pipeline {
            readings,
            engaged,
            measured,
            features,
        })
    }

    fn participants(&self) -> &[Participant] {
        self.readings.participants.as_deref().unwrap_or(&[])
    }

    fn rows(&self, filter: &SubgroupFilter) -> Vec<FeatureRow> {
        let mut rows = aggregate_by_text(
            &self.measured,
            self.participants(),
            filter,
            &ScrollMeasureSet::Enumerated,
        );
        attach_text_features(&mut rows, &self.features);
        rows
    }
}

fn readings_match_corpus(sessions: &[Session], articles: &[Article]) -> Result<()> {
    let index = CorpusIndex::new(articles);
    readscroll_core::session::validate_scores(sessions, &index)?;
    Ok(())
}

fn cv_config(p: &Params) -> CvConfig {
    CvConfig {
        k: p.k,
        c: p.c,
        seed: p.seed,
        averaging: p.averaging,
        length: p.length_feature,
        jobs: p.jobs as usize,
    }
}

pub fn ingest(p: &Params) -> Result<Vec<Artifact>> {
    p.require("--mapping", &p.mapping)?;
    let r = load_readings(p)?;
    let mut out = vec![Artifact::new(
        "sessions.jsonl",
        csv_bytes(|b| write_sessions(b, &r.sessions))?,
    )];
    if let Some(ps) = &r.participants {
        out.push(Artifact::new(
            "participants.csv",
            csv_bytes(|b| write_participants(b, ps))?,
        ));
    }
    Ok(out)
}

pub fn filter(p: &Params) -> Result<Vec<Artifact>> {
    let r = load_readings(p)?;
    let e = engaged(p, &r.sessions);
    Ok(vec![
        Artifact::new(
            "engagement.csv",
            csv_bytes(|b| write_engagement_csv(b, &e.outcome.reports))?,
        ),
        Artifact::new("engaged_sessions.jsonl", csv_bytes(|b| write_sessions(b, &e.sessions))?),
    ])
}

pub fn features(p: &Params) -> Result<Vec<Artifact>> {
    let pipe = Pipeline::run(p, false)?;
    Ok(vec![Artifact::new(
        "session_features.csv",
        csv_bytes(|b| write_session_measures_csv(b, &pipe.measured))?,
    )])
}

pub fn text_features(p: &Params) -> Result<Vec<Artifact>> {
    let articles = load_articles(p)?;
    let features = article_features(&articles, load_lexicon(p)?.as_ref())?;
    Ok(vec![Artifact::new(
        "text_features.csv",
        csv_bytes(|b| write_text_features_csv(b, &features))?,
    )])
}

pub fn aggregate(p: &Params) -> Result<Vec<Artifact>> {
    let pipe = Pipeline::run(p, true)?;
    let rows = pipe.rows(&p.filter.clone().unwrap_or_default());
    let m = build_matrix(&rows, p.features, p.length_feature, &ScrollMeasureSet::Enumerated)?;
    let counts: Vec<usize> = rows.iter().map(|r| r.n_sessions).collect();
    Ok(vec![Artifact::new(
        "matrix.csv",
        csv_bytes(|b| write_matrix_csv(b, &m, &counts))?,
    )])
}

struct SystemRow {
    selection: FeatureSelection,
    subgroup: String,
    n_texts: usize,
    outcome: std::result::Result<CvReport, Error>,
}

fn run_system(p: &Params, pipe: &Pipeline, selection: FeatureSelection, filter: &SubgroupFilter) -> SystemRow {
    let rows = pipe.rows(filter);
    SystemRow {
        selection,
        subgroup: filter.to_string(),
        n_texts: rows.len(),
        outcome: evaluate(&rows, selection, &ScrollMeasureSet::Enumerated, &cv_config(p)),
    }
}

fn write_systems(p: &Params, rows: &[SystemRow]) -> Vec<u8> {
    let mut s = String::from("system,subgroup,n_texts,n_features,precision,recall,f_score,k,c,seed,averaging,note\n");
    for r in rows {
        let (nf, prec, rec, f1, note) = match &r.outcome {
            Ok(rep) => (
                rep.n_features.to_string(),
                format!("{:.4}", rep.pooled.precision),
                format!("{:.4}", rep.pooled.recall),
                format!("{:.4}", rep.pooled.f1),
                String::new(),
            ),
            Err(e) => (
                r.selection.column_count().to_string(),
                "NA".into(),
                "NA".into(),
                "NA".into(),
                e.to_string().replace([',', '\n'], ";"),
            ),
        };
        let _ = writeln!(
            s,
            "{},{},{},{nf},{prec},{rec},{f1},{},{},{},{},{note}",
            r.selection.as_str(),
            r.subgroup,
            r.n_texts,
            p.k,
            p.c,
            p.seed,
            p.averaging,
        );
    }
    s.into_bytes()
}

pub fn classify(p: &Params) -> Result<Vec<Artifact>> {
    let pipe = Pipeline::run(p, true)?;
    let row = run_system(p, &pipe, p.features, &p.filter.clone().unwrap_or_default());
    if let Err(e) = &row.outcome {
        return Err(CliError::data(e.kind(), e.to_string()));
    }
    Ok(vec![Artifact::new("classify.csv", write_systems(p, &[row]))])
}

struct Analysis {
    table1: Vec<Table1Row>,
    artifacts: Vec<Artifact>,
    summary: String,
}

fn analysis(p: &Params, pipe: &Pipeline) -> Result<Analysis> {
    let cfg = Table1Config {
        family_size: p.family_size,
        n_permutations: p.n_permutations,
        seed: p.seed,
        pairing: p.pairing,
        jobs: p.jobs as usize,
    };
    let t1 = table1(&pipe.measured, &cfg)?;
    let participants = pipe.participants();
    let prof = score_by_proficiency(&pipe.measured, participants);
    let mut hists = speed_distribution(&pipe.measured, participants, GroupBy::Score, p.bin_width)?;
    let by_l1 = speed_distribution(&pipe.measured, participants, GroupBy::FirstLanguage, p.bin_width)?;
    let mut fig5 = csv_bytes(|b| write_histograms_csv(b, "score", &hists))?;
    // second block without its header so the file stays one table
    let l1_block = csv_bytes(|b| write_histograms_csv(b, "l1", &by_l1))?;
    fig5.extend(l1_block.splitn(2, |&c| c == b'\n').nth(1).unwrap_or_default());
    hists.extend(by_l1);

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "level_difference_method: {}",
        t1.iter()
            .find_map(|r| r.difference.as_ref().map(|d| d.method))
            .unwrap_or(p.pairing.tag())
    );
    match proficiency_speed_correlation(&pipe.measured, participants) {
        Ok((r, pv, n)) => {
            let _ = writeln!(summary, "proficiency_vs_speed_avg: r={r:.4} p={pv:.3e} n={n}");
        }
        Err(e) => {
            let _ = writeln!(summary, "proficiency_vs_speed_avg: NA ({e})");
        }
    }
    for l1 in &p.l1 {
        match cohort_summary(&pipe.measured, participants, l1) {
            Some(c) => {
                let _ = writeln!(
                    summary,
                    "cohort {l1}: sessions={} mean_score={:.4} mean_speed_avg={:.4} median_speed_avg={:.4}",
                    c.n_sessions, c.mean_score, c.mean_speed, c.median_speed
                );
            }
            None => {
                let _ = writeln!(summary, "cohort {l1}: no sessions");
                continue;
            }
        }
        match l1_correlates(&pipe.measured, participants, &pipe.features, l1) {
            Ok(list) => {
                for c in list {
                    let _ = writeln!(
                        summary,
                        "  correlate {l1} {}: r={:.4} p_adj={:.3e} m={}{}",
                        c.name,
                        c.r,
                        c.p_adjusted,
                        c.family_size,
                        if c.significant(0.01) { " *" } else { "" }
                    );
                }
            }
            Err(e) => {
                let _ = writeln!(summary, "  correlates {l1}: NA ({e})");
            }
        }
    }

    let artifacts = vec![
        Artifact::new("table1.csv", csv_bytes(|b| write_table1_csv(b, &t1))?),
        Artifact::new("fig4_proficiency.csv", csv_bytes(|b| write_proficiency_csv(b, &prof))?),
        Artifact::new("fig5_speed.csv", fig5),
    ];
    Ok(Analysis {
        table1: t1,
        artifacts,
        summary,
    })
}

fn counts_summary(p: &Params, pipe: &Pipeline) -> String {
    let reports = &pipe.engaged.outcome.reports;
    let count = |reason: EngagementReason| reports.iter().filter(|r| r.reason == reason).count();
    let mut s = String::new();
    let _ = writeln!(s, "sessions: {}", pipe.readings.sessions.len());
    let _ = writeln!(
        s,
        "engaged: {} (no_scroll={} below_halfway={} degenerate_layout={})",
        pipe.engaged.outcome.engaged.len(),
        count(EngagementReason::NoScroll),
        count(EngagementReason::BelowHalfway),
        pipe.engaged.outcome.errors.len()
    );
    if p.drop_partial_participants {
        let _ = writeln!(
            s,
            "kept_after_dropping_partial_participants: {}",
            pipe.engaged.sessions.len()
        );
    }
    let _ = writeln!(s, "measured: {}", pipe.measured.len());
    let _ = writeln!(s, "normalization: {}", p.length_basis.as_str());
    s
}

pub fn analyze(p: &Params) -> Result<Vec<Artifact>> {
    let pipe = Pipeline::run(p, true)?;
    let a = analysis(p, &pipe)?;
    let mut artifacts = a.artifacts;
    let summary = counts_summary(p, &pipe) + &a.summary;
    artifacts.push(Artifact::new("analysis_summary.txt", summary.into_bytes()));
    Ok(artifacts)
}

pub fn report(p: &Params) -> Result<Vec<Artifact>> {
    let pipe = Pipeline::run(p, true)?;
    let a = analysis(p, &pipe)?;
    let all = SubgroupFilter::default();
    let table2: Vec<SystemRow> = [
        FeatureSelection::Baseline,
        FeatureSelection::BaselineTraditional,
        FeatureSelection::BaselineScroll,
    ]
    .into_iter()
    .map(|sel| run_system(p, &pipe, sel, &all))
    .collect();
    let mut table3: Vec<SystemRow> = [
        FeatureSelection::ScrollRaw,
        FeatureSelection::ScrollNorm,
        FeatureSelection::ScrollAll,
    ]
    .into_iter()
    .map(|sel| run_system(p, &pipe, sel, &all))
    .collect();
    for g in &p.subgroups {
        table3.push(run_system(p, &pipe, FeatureSelection::ScrollAll, g));
    }

    let mut summary = counts_summary(p, &pipe);
    let _ = writeln!(summary, "texts: {}", pipe.rows(&all).len());
    summary.push_str(&a.summary);
    let significant: Vec<String> = a
        .table1
        .iter()
        .filter(|r| r.difference.as_ref().is_some_and(|d| d.p < 0.01))
        .map(|r| r.measure.name().to_string())
        .collect();
    let _ = writeln!(
        summary,
        "level_differences_p_below_0.01: {}",
        if significant.is_empty() {
            "none".into()
        } else {
            significant.join(",")
        }
    );
    for r in table2.iter().chain(&table3) {
        if let Err(e) = &r.outcome {
            let _ = writeln!(
                summary,
                "classifier {} [{}]: not evaluated ({e})",
                r.selection.as_str(),
                r.subgroup
            );
        }
    }

    let mut artifacts = a.artifacts;
    artifacts.push(Artifact::new("table2.csv", write_systems(p, &table2)));
    artifacts.push(Artifact::new("table3.csv", write_systems(p, &table3)));
    artifacts.push(Artifact::new("summary.txt", summary.into_bytes()));
    Ok(artifacts)
}

/// A synthetic cohort laid out exactly as the other commands expect:
/// `corpus/`, `sessions.jsonl`, `participants.csv`, `lexicon.csv`.
pub fn synth(p: &SynthParams) -> Result<Vec<Artifact>> {
    if p.sessions_per_participant > p.n_articles {
        return Err(CliError::usage("--sessions-per-participant exceeds --n-articles"));
    }
    let cohort = generate_cohort(&CohortConfig {
        n_participants: p.n_participants,
        n_articles: p.n_articles,
        sessions_per_participant: p.sessions_per_participant,
        n_disengaged: p.n_disengaged,
        seed: p.seed,
        ..CohortConfig::default()
    });
    let mut out = Vec::new();
    for a in &cohort.articles {
        let dir = format!("corpus/{}", a.article_id);
        out.push(Artifact::raw(
            format!("{dir}/{}.txt", a.level),
            a.body.clone().into_bytes(),
        ));
        if a.level == readscroll_core::Level::Elementary {
            out.push(Artifact::new(
                format!("{dir}/questions.tsv"),
                questions_tsv(&a.questions).into_bytes(),
            ));
            out.push(Artifact::raw(
                format!("{dir}/title.txt"),
                format!("{}\n", a.title).into_bytes(),
            ));
        }
    }
    out.push(Artifact::new(
        "sessions.jsonl",
        csv_bytes(|b| write_sessions(b, &cohort.sessions))?,
    ));
    out.push(Artifact::new(
        "participants.csv",
        csv_bytes(|b| write_participants(b, &cohort.participants))?,
    ));
    out.push(Artifact::new(
        "lexicon.csv",
        csv_bytes(|b| write_aoa_lexicon(b, &cohort.lexicon))?,
    ));
    Ok(out)
}
