use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::session::Level;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub name: String,
    pub level: Option<Level>,
    pub r: f64,
    pub p_raw: f64,
    /// Bonferroni-adjusted over `family_size` tests.
    pub p_adjusted: f64,
    pub family_size: usize,
    pub n: usize,
}

impl CorrelationResult {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_adjusted < alpha
    }
}

/// Sample Pearson correlation and its two-sided p-value from Student's t
/// with `n - 2` degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "pearson needs at least 3 pairs, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant input".into()));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = nf - 2.0;
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
        (2.0 * dist.sf(t.abs())).min(1.0)
    };
    Ok((r, p))
}

/// `min(1, p * family_size)` for each p.
pub fn bonferroni(p_values: &[f64], family_size: usize) -> Result<Vec<f64>> {
    if family_size < p_values.len() {
        return Err(Error::InvalidArgument(format!(
            "family size {family_size} smaller than {} tests",
            p_values.len()
        )));
    }
    p_values
        .iter()
        .map(|&p| {
            if (0.0..=1.0).contains(&p) {
                Ok((p * family_size as f64).min(1.0))
            } else {
                Err(Error::InvalidArgument(format!("p-value {p} outside [0, 1]")))
            }
        })
        .collect()
}
