//! Descriptive statistics, score correlations with Bonferroni correction,
//! level-difference testing and reader-subgroup analyses.
//!
//! Level differences are tested with a paired sign-flip permutation test
//! rather than a crossed random-effects model; every report carries the
//! method tag.

mod correlation;
mod descriptive;
mod permutation;
mod subjective;

use std::io::Write;

use serde::Serialize;

use crate::aggregate::MeasuredSession;
use crate::error::{Error, Result};
use crate::interaction::Measure;
use crate::session::Level;
use crate::text::fmt_num;

pub use correlation::{bonferroni, pearson, CorrelationResult};
pub use descriptive::{descriptive_by_level, mean_sd, median, percentile, LevelSummary};
pub use permutation::{
    level_difference_test, pairs_by_article, pairs_by_participant, sign_flip_p_value, LevelDifferenceResult,
    PairingMethod, MIN_PAIRS,
};
pub use subjective::{
    cohort_summary, histogram, is_monotone_in_proficiency, l1_correlates, proficiency_speed_correlation,
    score_by_proficiency, speed_distribution, CohortSummary, GroupBy, Histogram, ProficiencyScore, DEFAULT_BIN_WIDTH,
    MIN_COHORT,
};

/// Table-1 correlations: 8 measures × 2 levels.
pub const TABLE1_FAMILY_SIZE: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Cell {
    pub mean: f64,
    pub sd: f64,
    pub r: Option<f64>,
    pub p_adjusted: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub measure: Measure,
    pub elementary: Table1Cell,
    pub advanced: Table1Cell,
    pub difference: Option<LevelDifferenceResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Config {
    pub family_size: usize,
    pub n_permutations: usize,
    pub seed: u64,
    pub pairing: PairingMethod,
    pub jobs: usize,
}

impl Default for Table1Config {
    fn default() -> Self {
        Table1Config {
            family_size: TABLE1_FAMILY_SIZE,
            n_permutations: 100_000,
            seed: 0,
            pairing: PairingMethod::Participant,
            jobs: 1,
        }
    }
}

/// Normalized means and SDs per level, score correlations with adjusted
/// p-values, and the level-difference test for every measure. Correlations
/// or tests whose preconditions fail are left empty.
pub fn table1(sessions: &[MeasuredSession], config: &Table1Config) -> Result<Vec<Table1Row>> {
    let mut rows = Vec::with_capacity(Measure::ALL.len());
    for (mi, &m) in Measure::ALL.iter().enumerate() {
        let [e, a] = descriptive_by_level(sessions, m, true)?;
        let corr = |level: Level| -> Option<(f64, f64)> {
            let (x, y): (Vec<f64>, Vec<f64>) = sessions
                .iter()
                .filter(|s| s.session.level == level)
                .map(|s| (s.norm.get(m), s.session.score as f64))
                .unzip();
            pearson(&x, &y).ok()
        };
        let adjust = |c: Option<(f64, f64)>| -> Result<(Option<f64>, Option<f64>)> {
            match c {
                Some((r, p)) => Ok((Some(r), Some(bonferroni(&[p], config.family_size)?[0]))),
                None => Ok((None, None)),
            }
        };
        let (re, pe) = adjust(corr(Level::Elementary))?;
        let (ra, pa) = adjust(corr(Level::Advanced))?;
        let pairs = match config.pairing {
            PairingMethod::Participant => pairs_by_participant(sessions, m),
            PairingMethod::Article => pairs_by_article(sessions, m),
        };
        let difference = match level_difference_test(
            m.name(),
            &pairs,
            config.pairing,
            config.n_permutations,
            config.seed.wrapping_add(mi as u64),
            config.jobs,
        ) {
            Ok(d) => Some(d),
            Err(Error::InsufficientData(_)) => None,
            Err(e) => return Err(e),
        };
        rows.push(Table1Row {
            measure: m,
            elementary: Table1Cell {
                mean: e.mean,
                sd: e.sd,
                r: re,
                p_adjusted: pe,
                n: e.n,
            },
            advanced: Table1Cell {
                mean: a.mean,
                sd: a.sd,
                r: ra,
                p_adjusted: pa,
                n: a.n,
            },
            difference,
        });
    }
    Ok(rows)
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_else(|| "NA".into())
}

fn marker(p: Option<f64>) -> &'static str {
    match p {
        Some(p) if p < 0.01 => "*",
        _ => "",
    }
}

/// Table-1-style CSV. `sig_*` holds `*` when the adjusted p is below 0.01.
pub fn write_table1_csv<W: Write>(writer: W, rows: &[Table1Row]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::io("<table1 csv>", std::io::Error::other(e));
    w.write_record([
        "measure",
        "mean_elementary",
        "sd_elementary",
        "r_elementary",
        "p_adj_elementary",
        "sig_elementary",
        "n_elementary",
        "mean_advanced",
        "sd_advanced",
        "r_advanced",
        "p_adj_advanced",
        "sig_advanced",
        "n_advanced",
        "difference_p",
        "difference_pairs",
        "difference_method",
    ])
    .map_err(io)?;
    for row in rows {
        let (e, a) = (&row.elementary, &row.advanced);
        w.write_record([
            row.measure.name().to_string(),
            fmt_num(e.mean),
            fmt_num(e.sd),
            opt(e.r),
            opt(e.p_adjusted),
            marker(e.p_adjusted).into(),
            e.n.to_string(),
            fmt_num(a.mean),
            fmt_num(a.sd),
            opt(a.r),
            opt(a.p_adjusted),
            marker(a.p_adjusted).into(),
            a.n.to_string(),
            opt(row.difference.as_ref().map(|d| d.p)),
            row.difference
                .as_ref()
                .map(|d| d.n_pairs.to_string())
                .unwrap_or_else(|| "0".into()),
            row.difference
                .as_ref()
                .map(|d| d.method.to_string())
                .unwrap_or_else(|| "NA".into()),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io("<table1 csv>", e))
}

pub fn write_proficiency_csv<W: Write>(writer: W, table: &[ProficiencyScore]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::io("<proficiency csv>", std::io::Error::other(e));
    w.write_record(["proficiency", "mean_score", "n_sessions"])
        .map_err(io)?;
    for row in table {
        w.write_record([
            row.proficiency.to_string(),
            fmt_num(row.mean_score),
            row.n_sessions.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io("<proficiency csv>", e))
}

/// `i * width` rounded to 12 significant decimals so that edges print as
/// 0.3 rather than 0.30000000000000004.
fn bin_edge(i: usize, width: f64) -> f64 {
    (i as f64 * width * 1e12).round() / 1e12
}

/// Long format: one row per group and bin.
pub fn write_histograms_csv<W: Write>(writer: W, grouping: &str, hists: &[Histogram]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::io("<histogram csv>", std::io::Error::other(e));
    w.write_record([
        "grouping",
        "group",
        "n",
        "bin_lo",
        "bin_hi",
        "density",
        "group_mean",
        "group_median",
    ])
    .map_err(io)?;
    for h in hists {
        for (i, d) in h.densities.iter().enumerate() {
            w.write_record([
                grouping.to_string(),
                h.group.clone(),
                h.n.to_string(),
                fmt_num(bin_edge(i, h.bin_width)),
                fmt_num(bin_edge(i + 1, h.bin_width)),
                fmt_num(*d),
                fmt_num(h.mean),
                fmt_num(h.median),
            ])
            .map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::io("<histogram csv>", e))
}
