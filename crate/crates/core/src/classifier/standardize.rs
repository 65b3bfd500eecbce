use crate::error::{Error, Result};

/// Per-column z-scoring fitted on training rows. Columns with zero variance
/// are dropped. Non-finite cells are treated as missing: they are ignored
/// when fitting and mapped to the column mean (0) when transforming.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    /// Indices of the retained input columns.
    pub columns: Vec<usize>,
    pub means: Vec<f64>,
    /// Population standard deviations.
    pub stddevs: Vec<f64>,
    pub dropped: Vec<usize>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Result<Standardizer> {
        if x.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "standardization needs at least 2 rows, got {}",
                x.len()
            )));
        }
        let width = x[0].len();
        let mut s = Standardizer {
            columns: Vec::new(),
            means: Vec::new(),
            stddevs: Vec::new(),
            dropped: Vec::new(),
        };
        for j in 0..width {
            let vals: Vec<f64> = x.iter().map(|r| r[j]).filter(|v| v.is_finite()).collect();
            if vals.len() < 2 {
                s.dropped.push(j);
                continue;
            }
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            if sd.is_nan() || sd <= 1e-12 * mean.abs().max(1e-300) {
                s.dropped.push(j);
                continue;
            }
            s.columns.push(j);
            s.means.push(mean);
            s.stddevs.push(sd);
        }
        if s.columns.is_empty() {
            return Err(Error::AllZeroVariance);
        }
        if !s.dropped.is_empty() {
            log::warn!("dropped zero-variance columns {:?}", s.dropped);
        }
        Ok(s)
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        self.columns
            .iter()
            .zip(self.means.iter().zip(&self.stddevs))
            .map(|(&j, (m, sd))| {
                let v = row[j];
                if v.is_finite() {
                    (v - m) / sd
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter().map(|r| self.transform_row(r)).collect()
    }
}

/// Fits on `x` and returns the transformed matrix with its parameters.
pub fn standardize(x: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Standardizer)> {
    let s = Standardizer::fit(x)?;
    Ok((s.transform(x), s))
}
