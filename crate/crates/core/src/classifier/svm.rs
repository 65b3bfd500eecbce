//! Linear SVM with L2 regularization and hinge loss,
//! `min_w ½‖w‖² + C Σ max(0, 1 − yᵢ w·xᵢ)`, solved by dual coordinate
//! descent. The bias is learned as the weight of a constant feature.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    /// Stop when the spread of projected gradients falls below this.
    pub tolerance: f64,
    pub max_epochs: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            tolerance: 1e-6,
            max_epochs: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub epochs: usize,
    pub converged: bool,
}

impl LinearSvm {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    /// `true` is the positive class.
    pub fn predict(&self, x: &[f64]) -> bool {
        self.decision(x) > 0.0
    }
}

/// Primal objective, for checking solutions.
pub fn primal_objective(model: &LinearSvm, x: &[Vec<f64>], y: &[bool], c: f64) -> f64 {
    let reg = 0.5 * (model.weights.iter().map(|w| w * w).sum::<f64>() + model.bias * model.bias);
    let loss: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, &yi)| {
            let s = if yi { 1.0 } else { -1.0 };
            (1.0 - s * model.decision(xi)).max(0.0)
        })
        .sum();
    reg + c * loss
}

pub fn train_svm(x: &[Vec<f64>], y: &[bool], params: &SvmParams, rng: &mut ChaCha8Rng) -> Result<LinearSvm> {
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::InvalidArgument(format!("C must be positive, got {}", params.c)));
    }
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::InvalidArgument("feature rows and labels must align".into()));
    }
    if y.iter().all(|&v| v) || y.iter().all(|&v| !v) {
        return Err(Error::SingleClass);
    }
    let d = x[0].len();
    let sign: Vec<f64> = y.iter().map(|&v| if v { 1.0 } else { -1.0 }).collect();
    // squared norms including the constant bias feature
    let qii: Vec<f64> = x.iter().map(|r| r.iter().map(|v| v * v).sum::<f64>() + 1.0).collect();
    let mut alpha = vec![0.0; x.len()];
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..x.len()).collect();
    let c = params.c;

    let mut epochs = 0;
    let mut converged = false;
    while epochs < params.max_epochs {
        epochs += 1;
        order.shuffle(rng);
        let mut pg_max = f64::NEG_INFINITY;
        let mut pg_min = f64::INFINITY;
        for &i in &order {
            let xi = &x[i];
            let g = sign[i] * (w.iter().zip(xi).map(|(a, v)| a * v).sum::<f64>() + b) - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= c {
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / qii[i]).clamp(0.0, c);
                let delta = (alpha[i] - old) * sign[i];
                if delta != 0.0 {
                    for (wj, v) in w.iter_mut().zip(xi) {
                        *wj += delta * v;
                    }
                    b += delta;
                }
            }
        }
        if pg_max - pg_min < params.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("svm did not reach tolerance {} in {} epochs", params.tolerance, epochs);
    }
    Ok(LinearSvm {
        weights: w,
        bias: b,
        epochs,
        converged,
    })
}
