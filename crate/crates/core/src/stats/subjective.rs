//! Reader-dependent analyses: scores by proficiency, speed distributions by
//! group, and score correlates within one first-language cohort.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::correlation::{bonferroni, pearson, CorrelationResult};
use super::descriptive::{median, percentile};
use crate::aggregate::MeasuredSession;
use crate::error::{Error, Result};
use crate::interaction::Measure;
use crate::session::{Level, Participant};
use crate::text::ArticleFeatures;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProficiencyScore {
    pub proficiency: i32,
    pub mean_score: f64,
    pub n_sessions: usize,
}

/// Mean comprehension score per self-reported proficiency band, highest
/// band first. Bands without sessions are omitted.
pub fn score_by_proficiency(sessions: &[MeasuredSession], participants: &[Participant]) -> Vec<ProficiencyScore> {
    let prof: HashMap<&str, i32> = participants
        .iter()
        .map(|p| (p.participant_id.as_str(), p.self_proficiency))
        .collect();
    let mut acc: BTreeMap<i32, (f64, usize)> = BTreeMap::new();
    for s in sessions {
        if let Some(&band) = prof.get(s.session.participant_id.as_str()) {
            let e = acc.entry(band).or_default();
            e.0 += s.session.score as f64;
            e.1 += 1;
        }
    }
    acc.into_iter()
        .rev()
        .map(|(proficiency, (sum, n))| ProficiencyScore {
            proficiency,
            mean_score: sum / n as f64,
            n_sessions: n,
        })
        .collect()
}

/// Whether mean score never rises as proficiency falls.
pub fn is_monotone_in_proficiency(table: &[ProficiencyScore]) -> bool {
    table.windows(2).all(|w| w[1].mean_score <= w[0].mean_score)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    FirstLanguage,
    Score,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub group: String,
    pub n: usize,
    pub bin_width: f64,
    /// Upper edge of the binned range; values above it share the last bin.
    pub upper: f64,
    pub densities: Vec<f64>,
    pub mean: f64,
    pub median: f64,
}

impl Histogram {
    /// ∑ density × width; 1 for any non-empty group.
    pub fn total_mass(&self) -> f64 {
        self.densities.iter().sum::<f64>() * self.bin_width
    }
}

pub const DEFAULT_BIN_WIDTH: f64 = 0.1;
pub const DISPLAY_PERCENTILE: f64 = 0.99;

/// Density histogram of raw values over `[0, p99]` in fixed-width bins.
pub fn histogram(group: &str, values: &[f64], bin_width: f64) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::InsufficientData(format!("group `{group}` is empty")));
    }
    if bin_width.is_nan() || bin_width <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    let upper = percentile(values, DISPLAY_PERCENTILE).unwrap().max(0.0);
    let n_bins = ((upper / bin_width) - 1e-9).ceil().max(1.0) as usize;
    let mut counts = vec![0usize; n_bins];
    for &v in values {
        let idx = ((v.max(0.0) / bin_width).floor() as usize).min(n_bins - 1);
        counts[idx] += 1;
    }
    let n = values.len();
    Ok(Histogram {
        group: group.to_string(),
        n,
        bin_width,
        upper: n_bins as f64 * bin_width,
        densities: counts.iter().map(|&c| c as f64 / (n as f64 * bin_width)).collect(),
        mean: values.iter().sum::<f64>() / n as f64,
        median: median(values).unwrap(),
    })
}

/// Raw average-speed histograms per group. First-language groups use the
/// language as written in the participant table (lowercased).
pub fn speed_distribution(
    sessions: &[MeasuredSession],
    participants: &[Participant],
    group_by: GroupBy,
    bin_width: f64,
) -> Result<Vec<Histogram>> {
    let l1: HashMap<&str, String> = participants
        .iter()
        .map(|p| (p.participant_id.as_str(), p.first_language.to_lowercase()))
        .collect();
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for s in sessions {
        let key = match group_by {
            GroupBy::Score => format!("score_{}", s.session.score),
            GroupBy::FirstLanguage => match l1.get(s.session.participant_id.as_str()) {
                Some(l) => l.clone(),
                None => continue,
            },
        };
        groups.entry(key).or_default().push(s.raw.speed_avg);
    }
    groups.iter().map(|(g, v)| histogram(g, v, bin_width)).collect()
}

/// Mean score and raw average-speed summary for one L1 cohort.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CohortSummary {
    pub n_sessions: usize,
    pub mean_score: f64,
    pub mean_speed: f64,
    pub median_speed: f64,
}

pub fn cohort_summary(sessions: &[MeasuredSession], participants: &[Participant], l1: &str) -> Option<CohortSummary> {
    let cohort = cohort_sessions(sessions, participants, l1);
    if cohort.is_empty() {
        return None;
    }
    let n = cohort.len() as f64;
    let speeds: Vec<f64> = cohort.iter().map(|s| s.raw.speed_avg).collect();
    Some(CohortSummary {
        n_sessions: cohort.len(),
        mean_score: cohort.iter().map(|s| s.session.score as f64).sum::<f64>() / n,
        mean_speed: speeds.iter().sum::<f64>() / n,
        median_speed: median(&speeds).unwrap(),
    })
}

fn cohort_sessions<'a>(
    sessions: &'a [MeasuredSession],
    participants: &[Participant],
    l1: &str,
) -> Vec<&'a MeasuredSession> {
    let want = l1.to_lowercase();
    let members: std::collections::HashSet<&str> = participants
        .iter()
        .filter(|p| p.first_language.to_lowercase() == want)
        .map(|p| p.participant_id.as_str())
        .collect();
    sessions
        .iter()
        .filter(|s| members.contains(s.session.participant_id.as_str()))
        .collect()
}

pub const MIN_COHORT: usize = 30;

/// Correlates every normalized scroll measure and every text feature with
/// comprehension score within one L1 cohort, Bonferroni-adjusts over the
/// correlations actually computed, and ranks by |r|. Features that are
/// constant over the cohort are skipped.
pub fn l1_correlates(
    sessions: &[MeasuredSession],
    participants: &[Participant],
    text_features: &[ArticleFeatures],
    l1: &str,
) -> Result<Vec<CorrelationResult>> {
    let cohort = cohort_sessions(sessions, participants, l1);
    if cohort.len() < MIN_COHORT {
        return Err(Error::InsufficientData(format!(
            "cohort `{l1}` has {} sessions, need at least {MIN_COHORT}",
            cohort.len()
        )));
    }
    let feats: HashMap<(&str, Level), &ArticleFeatures> = text_features
        .iter()
        .map(|f| ((f.article_id.as_str(), f.level), f))
        .collect();
    let scores: Vec<f64> = cohort.iter().map(|s| s.session.score as f64).collect();

    let mut candidates: Vec<(String, Vec<f64>)> = Measure::ALL
        .iter()
        .map(|&m| (m.name().to_string(), cohort.iter().map(|s| s.norm.get(m)).collect()))
        .collect();
    type Extract = fn(&ArticleFeatures) -> Option<f64>;
    let text_cols: [(&str, Extract); 14] = [
        ("length", |f| Some(f.features.n_tokens as f64)),
        ("ttr", |f| Some(f.features.richness.ttr)),
        ("root_ttr", |f| Some(f.features.richness.root_ttr)),
        ("corrected_ttr", |f| Some(f.features.richness.corrected_ttr)),
        ("bilog_ttr", |f| Some(f.features.richness.bilog_ttr)),
        ("uber", |f| f.features.richness.uber),
        ("avg_chars_per_word", |f| {
            Some(f.features.traditional.avg_chars_per_word)
        }),
        ("avg_syllables_per_word", |f| {
            Some(f.features.traditional.avg_syllables_per_word)
        }),
        ("avg_sentence_len", |f| Some(f.features.traditional.avg_sentence_len)),
        ("flesch_kincaid", |f| Some(f.features.traditional.flesch_kincaid)),
        ("coleman_liau", |f| Some(f.features.traditional.coleman_liau)),
        ("smog", |f| Some(f.features.traditional.smog)),
        ("mean_aoa_tokens", |f| f.features.aoa_tokens.map(|a| a.mean)),
        ("mean_aoa_lemmas", |f| f.features.aoa_lemmas.map(|a| a.mean)),
    ];
    for (name, get) in text_cols {
        let vals: Option<Vec<f64>> = cohort
            .iter()
            .map(|s| {
                feats
                    .get(&(s.session.article_id.as_str(), s.session.level))
                    .and_then(|f| get(f))
            })
            .collect();
        if let Some(v) = vals {
            candidates.push((name.to_string(), v));
        }
    }

    let mut computed = Vec::new();
    for (name, values) in candidates {
        match pearson(&values, &scores) {
            Ok((r, p)) => computed.push((name, r, p)),
            Err(Error::UndefinedCorrelation(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    let m = computed.len();
    let adjusted = bonferroni(&computed.iter().map(|c| c.2).collect::<Vec<_>>(), m)?;
    let mut out: Vec<CorrelationResult> = computed
        .into_iter()
        .zip(adjusted)
        .map(|((name, r, p), pa)| CorrelationResult {
            name,
            level: None,
            r,
            p_raw: p,
            p_adjusted: pa,
            family_size: m,
            n: scores.len(),
        })
        .collect();
    out.sort_by(|a, b| b.r.abs().total_cmp(&a.r.abs()).then_with(|| a.name.cmp(&b.name)));
    Ok(out)
}

/// Correlation between self-reported proficiency and raw average speed
/// over all sessions with a known participant.
pub fn proficiency_speed_correlation(
    sessions: &[MeasuredSession],
    participants: &[Participant],
) -> Result<(f64, f64, usize)> {
    let prof: HashMap<&str, i32> = participants
        .iter()
        .map(|p| (p.participant_id.as_str(), p.self_proficiency))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = sessions
        .iter()
        .filter_map(|s| {
            prof.get(s.session.participant_id.as_str())
                .map(|&p| (p as f64, s.raw.speed_avg))
        })
        .unzip();
    let (r, p) = pearson(&xs, &ys)?;
    Ok((r, p, xs.len()))
}
