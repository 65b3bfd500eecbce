use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    #[default]
    Weighted,
    Macro,
    Micro,
}

impl Averaging {
    pub fn parse(s: &str) -> Option<Averaging> {
        match s {
            "weighted" => Some(Averaging::Weighted),
            "macro" => Some(Averaging::Macro),
            "micro" => Some(Averaging::Micro),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Averaging::Weighted => "weighted",
            Averaging::Macro => "macro",
            Averaging::Micro => "micro",
        }
    }
}

impl fmt::Display for Averaging {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Precision, recall and F1 over both classes. Undefined ratios (no
/// predictions of a class) count as 0.
pub fn scores(truth: &[bool], pred: &[bool], avg: Averaging) -> Scores {
    assert_eq!(truth.len(), pred.len());
    let mut per_class = Vec::with_capacity(2);
    let mut tp_sum = 0;
    for class in [false, true] {
        let tp = truth
            .iter()
            .zip(pred)
            .filter(|(t, p)| **t == class && **p == class)
            .count();
        let predicted = pred.iter().filter(|&&p| p == class).count();
        let support = truth.iter().filter(|&&t| t == class).count();
        tp_sum += tp;
        let p = ratio(tp, predicted);
        let r = ratio(tp, support);
        per_class.push((p, r, f1(p, r), support));
    }
    match avg {
        Averaging::Micro => {
            let acc = ratio(tp_sum, truth.len());
            Scores {
                precision: acc,
                recall: acc,
                f1: acc,
            }
        }
        Averaging::Macro => {
            let n = per_class.len() as f64;
            Scores {
                precision: per_class.iter().map(|c| c.0).sum::<f64>() / n,
                recall: per_class.iter().map(|c| c.1).sum::<f64>() / n,
                f1: per_class.iter().map(|c| c.2).sum::<f64>() / n,
            }
        }
        Averaging::Weighted => {
            let total = truth.len().max(1) as f64;
            let w = |k: fn(&(f64, f64, f64, usize)) -> f64| {
                per_class.iter().map(|c| k(c) * c.3 as f64).sum::<f64>() / total
            };
            Scores {
                precision: w(|c| c.0),
                recall: w(|c| c.1),
                f1: w(|c| c.2),
            }
        }
    }
}
