//! Paired sign-flip permutation test for level differences.
//!
//! Each participant read one elementary and one advanced text, so the
//! within-participant difference removes the participant's own baseline.
//! Under the null the sign of each difference is exchangeable.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use super::descriptive::mean_sd;
use crate::aggregate::MeasuredSession;
use crate::error::{Error, Result};
use crate::interaction::Measure;
use crate::rng::{stream_rng, Stream};
use crate::session::Level;

pub const MIN_PAIRS: usize = 10;
const BLOCK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingMethod {
    /// One pair per participant.
    Participant,
    /// One pair per article: mean over its elementary vs advanced readers.
    Article,
}

impl PairingMethod {
    pub fn tag(self) -> &'static str {
        match self {
            PairingMethod::Participant => "sign-flip permutation, paired by participant",
            PairingMethod::Article => "sign-flip permutation, paired by article",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelDifferenceResult {
    pub measure: String,
    pub mean_elementary: f64,
    pub sd_elementary: f64,
    pub mean_advanced: f64,
    pub sd_advanced: f64,
    pub n_pairs: usize,
    pub p: f64,
    pub method: &'static str,
    /// Whether `p` came from full enumeration rather than sampling.
    pub exact: bool,
}

/// Two-sided p-value for `H0: differences are symmetric about 0`, using the
/// absolute mean as statistic. Enumerates all sign patterns when there are
/// no more of them than `n_permutations`, otherwise samples
/// `n_permutations` patterns and returns `(hits + 1) / (n + 1)`.
///
/// Sampling runs in fixed blocks, each on its own seed stream, so the
/// result does not depend on `jobs`.
pub fn sign_flip_p_value(diffs: &[f64], n_permutations: usize, seed: u64, jobs: usize) -> (f64, bool) {
    let n = diffs.len();
    let observed = (diffs.iter().sum::<f64>() / n as f64).abs();
    let scale = diffs.iter().map(|d| d.abs()).fold(0.0, f64::max);
    // tolerance for ties introduced by summation order
    let at_least = |s: f64| s >= observed - 1e-12 * scale;

    if n < 63 && (1u64 << n) <= n_permutations as u64 {
        let total = 1u64 << n;
        let hits = (0..total)
            .filter(|mask| {
                let s: f64 = diffs
                    .iter()
                    .enumerate()
                    .map(|(i, d)| if mask >> i & 1 == 1 { -d } else { *d })
                    .sum();
                at_least((s / n as f64).abs())
            })
            .count();
        return (hits as f64 / total as f64, true);
    }

    let blocks = n_permutations.div_ceil(BLOCK);
    let run_block = |b: usize| -> usize {
        let mut rng = stream_rng(seed, Stream::Permutation, b as u64);
        let count = BLOCK.min(n_permutations - b * BLOCK);
        (0..count)
            .filter(|_| {
                let s: f64 = diffs.iter().map(|d| if rng.gen::<bool>() { -d } else { *d }).sum();
                at_least((s / n as f64).abs())
            })
            .count()
    };
    let hits: usize = if jobs <= 1 || blocks == 1 {
        (0..blocks).map(run_block).sum()
    } else {
        std::thread::scope(|scope| {
            let run = &run_block;
            let per = blocks.div_ceil(jobs);
            let handles: Vec<_> = (0..jobs)
                .map(|j| scope.spawn(move || (j * per..((j + 1) * per).min(blocks)).map(run).sum::<usize>()))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("permutation thread panicked"))
                .sum()
        })
    };
    ((hits + 1) as f64 / (n_permutations + 1) as f64, false)
}

/// Tests whether paired `(elementary, advanced)` values differ.
pub fn level_difference_test(
    measure: &str,
    pairs: &[(f64, f64)],
    method: PairingMethod,
    n_permutations: usize,
    seed: u64,
    jobs: usize,
) -> Result<LevelDifferenceResult> {
    if pairs.len() < MIN_PAIRS {
        return Err(Error::InsufficientData(format!(
            "level difference test needs at least {MIN_PAIRS} pairs, got {}",
            pairs.len()
        )));
    }
    if n_permutations == 0 {
        return Err(Error::InvalidArgument("n_permutations must be positive".into()));
    }
    let elem: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let adv: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let diffs: Vec<f64> = pairs.iter().map(|(e, a)| a - e).collect();
    let (me, se) = mean_sd(&elem)?;
    let (ma, sa) = mean_sd(&adv)?;
    let (p, exact) = sign_flip_p_value(&diffs, n_permutations, seed, jobs);
    Ok(LevelDifferenceResult {
        measure: measure.to_string(),
        mean_elementary: me,
        sd_elementary: se,
        mean_advanced: ma,
        sd_advanced: sa,
        n_pairs: pairs.len(),
        p,
        method: method.tag(),
        exact,
    })
}

/// Normalized `measure` paired within participant. Participants without a
/// reading at both levels are skipped.
pub fn pairs_by_participant(sessions: &[MeasuredSession], measure: Measure) -> Vec<(f64, f64)> {
    let mut by: BTreeMap<&str, [Option<f64>; 2]> = BTreeMap::new();
    for s in sessions {
        let slot = by.entry(s.session.participant_id.as_str()).or_default();
        let idx = (s.session.level == Level::Advanced) as usize;
        slot[idx] = Some(s.norm.get(measure));
    }
    by.values().filter_map(|v| Some((v[0]?, v[1]?))).collect()
}

/// Normalized `measure` averaged per article and level, paired by article.
pub fn pairs_by_article(sessions: &[MeasuredSession], measure: Measure) -> Vec<(f64, f64)> {
    let mut by: BTreeMap<&str, [(f64, usize); 2]> = BTreeMap::new();
    for s in sessions {
        let slot = by.entry(s.session.article_id.as_str()).or_default();
        let idx = (s.session.level == Level::Advanced) as usize;
        slot[idx].0 += s.norm.get(measure);
        slot[idx].1 += 1;
    }
    by.values()
        .filter(|v| v[0].1 > 0 && v[1].1 > 0)
        .map(|v| (v[0].0 / v[0].1 as f64, v[1].0 / v[1].1 as f64))
        .collect()
}
