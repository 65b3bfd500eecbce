//! Linear SVM readability classifier evaluated with stratified k-fold
//! cross-validation.

mod folds;
mod metrics;
mod standardize;
mod svm;

use std::io::Write;

use serde::Serialize;

use crate::aggregate::{build_matrix, FeatureRow, FeatureSelection, LabeledMatrix, ScrollMeasureSet};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};
use crate::text::LengthFeature;

pub use folds::stratified_folds;
pub use metrics::{scores, Averaging, Scores};
pub use standardize::{standardize, Standardizer};
pub use svm::{primal_objective, train_svm, LinearSvm, SvmParams};

/// A trained model together with the scaling it expects.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub standardizer: Standardizer,
    pub svm: LinearSvm,
}

impl LinearModel {
    pub fn fit(x: &[Vec<f64>], y: &[bool], params: &SvmParams, seed: u64, stream_index: u64) -> Result<Self> {
        let standardizer = Standardizer::fit(x)?;
        let z = standardizer.transform(x);
        let mut rng = stream_rng(seed, Stream::Svm, stream_index);
        let svm = train_svm(&z, y, params, &mut rng)?;
        Ok(LinearModel { standardizer, svm })
    }

    pub fn predict(&self, row: &[f64]) -> bool {
        self.svm.predict(&self.standardizer.transform_row(row))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvConfig {
    pub k: usize,
    pub c: f64,
    pub seed: u64,
    pub averaging: Averaging,
    pub length: LengthFeature,
    /// Folds trained concurrently; 1 runs sequentially.
    pub jobs: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            k: 10,
            c: 1.0,
            seed: 0,
            averaging: Averaging::Weighted,
            length: LengthFeature::Words,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_test: usize,
    pub scores: Scores,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub selection: Option<FeatureSelection>,
    pub n_features: usize,
    pub n_rows: usize,
    pub k: usize,
    pub c: f64,
    pub seed: u64,
    pub averaging: Averaging,
    pub folds: Vec<FoldResult>,
    /// Over the concatenated held-out predictions.
    pub pooled: Scores,
    pub fold_of: Vec<usize>,
    pub predictions: Vec<bool>,
}

/// Cross-validates `matrix` over a given fold assignment. Scaling is fitted
/// inside each training split only.
pub fn cross_validate_with_folds(matrix: &LabeledMatrix, fold_of: &[usize], config: &CvConfig) -> Result<CvReport> {
    let k = config.k;
    let params = SvmParams {
        c: config.c,
        ..SvmParams::default()
    };
    let run_fold = |f: usize| -> Result<Vec<(usize, bool)>> {
        let (mut tx, mut ty) = (Vec::new(), Vec::new());
        for (i, row) in matrix.x.iter().enumerate() {
            if fold_of[i] != f {
                tx.push(row.clone());
                ty.push(matrix.y[i]);
            }
        }
        let model = LinearModel::fit(&tx, &ty, &params, config.seed, f as u64)?;
        Ok((0..matrix.x.len())
            .filter(|&i| fold_of[i] == f)
            .map(|i| (i, model.predict(&matrix.x[i])))
            .collect())
    };

    let mut per_fold: Vec<Vec<(usize, bool)>> = Vec::with_capacity(k);
    if config.jobs <= 1 {
        for f in 0..k {
            per_fold.push(run_fold(f)?);
        }
    } else {
        let results: Vec<Result<Vec<(usize, bool)>>> = std::thread::scope(|scope| {
            let run = &run_fold;
            let mut out = Vec::with_capacity(k);
            for chunk in (0..k).collect::<Vec<_>>().chunks(config.jobs.max(1)) {
                let handles: Vec<_> = chunk.iter().map(|&f| scope.spawn(move || run(f))).collect();
                out.extend(handles.into_iter().map(|h| h.join().expect("fold thread panicked")));
            }
            out
        });
        for r in results {
            per_fold.push(r?);
        }
    }

    let mut predictions = vec![false; matrix.x.len()];
    let mut folds = Vec::with_capacity(k);
    for (f, preds) in per_fold.iter().enumerate() {
        let truth: Vec<bool> = preds.iter().map(|(i, _)| matrix.y[*i]).collect();
        let pred: Vec<bool> = preds.iter().map(|(_, p)| *p).collect();
        for &(i, p) in preds {
            predictions[i] = p;
        }
        folds.push(FoldResult {
            fold: f,
            n_test: preds.len(),
            scores: scores(&truth, &pred, config.averaging),
        });
    }
    Ok(CvReport {
        selection: None,
        n_features: matrix.columns.len(),
        n_rows: matrix.x.len(),
        k,
        c: config.c,
        seed: config.seed,
        averaging: config.averaging,
        folds,
        pooled: scores(&matrix.y, &predictions, config.averaging),
        fold_of: fold_of.to_vec(),
        predictions,
    })
}

pub fn cross_validate(matrix: &LabeledMatrix, config: &CvConfig) -> Result<CvReport> {
    let fold_of = stratified_folds(&matrix.y, config.k, config.seed)?;
    cross_validate_with_folds(matrix, &fold_of, config)
}

/// Builds the matrix for `selection` and cross-validates it.
pub fn evaluate(
    rows: &[FeatureRow],
    selection: FeatureSelection,
    measure_set: &ScrollMeasureSet,
    config: &CvConfig,
) -> Result<CvReport> {
    let matrix = build_matrix(rows, selection, config.length, measure_set)?;
    let mut report = cross_validate(&matrix, config)?;
    report.selection = Some(selection);
    Ok(report)
}

/// Mean pooled scores over several seeds.
pub fn seed_averaged(
    rows: &[FeatureRow],
    selection: FeatureSelection,
    measure_set: &ScrollMeasureSet,
    config: &CvConfig,
    seeds: &[u64],
) -> Result<Scores> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("no seeds".into()));
    }
    let mut acc = (0.0, 0.0, 0.0);
    for &seed in seeds {
        let r = evaluate(rows, selection, measure_set, &CvConfig { seed, ..config.clone() })?;
        acc.0 += r.pooled.precision;
        acc.1 += r.pooled.recall;
        acc.2 += r.pooled.f1;
    }
    let n = seeds.len() as f64;
    Ok(Scores {
        precision: acc.0 / n,
        recall: acc.1 / n,
        f1: acc.2 / n,
    })
}

/// Report table: `system,n_features,precision,recall,f_score`.
pub fn write_report_table<W: Write>(writer: W, reports: &[(String, &CvReport)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::io("<classify csv>", std::io::Error::other(e));
    w.write_record([
        "system",
        "n_features",
        "precision",
        "recall",
        "f_score",
        "k",
        "c",
        "seed",
        "averaging",
    ])
    .map_err(io)?;
    for (name, r) in reports {
        w.write_record([
            name.clone(),
            r.n_features.to_string(),
            format!("{:.4}", r.pooled.precision),
            format!("{:.4}", r.pooled.recall),
            format!("{:.4}", r.pooled.f1),
            r.k.to_string(),
            r.c.to_string(),
            r.seed.to_string(),
            r.averaging.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io("<classify csv>", e))
}
