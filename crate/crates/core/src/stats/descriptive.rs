use serde::Serialize;

use crate::aggregate::MeasuredSession;
use crate::error::{Error, Result};
use crate::interaction::Measure;
use crate::session::Level;

/// Sample mean and sample standard deviation (n − 1).
pub fn mean_sd(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 values for a standard deviation, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}

/// Median with the midpoint rule for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    percentile(values, 0.5)
}

/// Linear-interpolation percentile, `q` in [0, 1].
pub fn percentile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelSummary {
    pub level: Level,
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

/// Mean and SD of a measure at each level; normalized values when
/// `normalized` is set.
pub fn descriptive_by_level(
    sessions: &[MeasuredSession],
    measure: Measure,
    normalized: bool,
) -> Result<[LevelSummary; 2]> {
    let summary = |level: Level| -> Result<LevelSummary> {
        let values: Vec<f64> = sessions
            .iter()
            .filter(|s| s.session.level == level)
            .map(|s| {
                if normalized {
                    s.norm.get(measure)
                } else {
                    s.raw.get(measure)
                }
            })
            .collect();
        if values.is_empty() {
            return Err(Error::InsufficientData(format!("no {level} sessions")));
        }
        let (mean, sd) =
            mean_sd(&values).map_err(|_| Error::InsufficientData(format!("fewer than 2 {level} sessions")))?;
        Ok(LevelSummary {
            level,
            mean,
            sd,
            n: values.len(),
        })
    };
    Ok([summary(Level::Elementary)?, summary(Level::Advanced)?])
}
