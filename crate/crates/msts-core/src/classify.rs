//! 1-nearest-neighbour classification over precomputed distance lookups.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::dataset::{check_schema, TimeSeriesDataset};
use crate::dtw::{dtw_dependent, WarpingParams};
use crate::error::{Error, Result};
use crate::folds::FoldAssignment;
use crate::tensor::{cross_distance, DistanceTensor};

/// How a feature subset turns into one distance between two instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    /// Sum the per-feature univariate DTW costs (tensor lookups).
    LookupSum,
    /// Exact multichannel DTW with one shared warping path.
    Dependent,
}

/// Cross-validated single-feature predictions, row per feature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionMatrix {
    /// row-major [feature][train instance]
    predicted: Vec<usize>,
    pub n_features: usize,
    pub n_instances: usize,
    pub folds: FoldAssignment,
}

impl PredictionMatrix {
    pub fn row(&self, feature: usize) -> &[usize] {
        &self.predicted[feature * self.n_instances..(feature + 1) * self.n_instances]
    }
}

fn check_consistency(
    t: &DistanceTensor,
    labels: &[usize],
    subset: &[usize],
    folds: &FoldAssignment,
) -> Result<()> {
    if labels.len() != t.n_instances || folds.fold_of.len() != t.n_instances {
        return Err(Error::InvalidArgument(format!(
            "tensor covers {} instances, labels {} and folds {}",
            t.n_instances,
            labels.len(),
            folds.fold_of.len()
        )));
    }
    if subset.is_empty() {
        return Err(Error::InvalidArgument("empty feature subset".into()));
    }
    if let Some(&f) = subset.iter().find(|&&f| f >= t.n_features) {
        return Err(Error::InvalidArgument(format!(
            "feature index {f} out of range (tensor has {})",
            t.n_features
        )));
    }
    Ok(())
}

/// Leave-fold-out 1NN prediction for every training instance, using the
/// summed subset distance. Ties go to the smallest train index.
pub fn cv_predict_subset(
    t: &DistanceTensor,
    labels: &[usize],
    subset: &[usize],
    folds: &FoldAssignment,
) -> Result<Vec<usize>> {
    check_consistency(t, labels, subset, folds)?;
    let slices: Vec<&[f64]> = subset.iter().map(|&f| t.slice(f)).collect();
    let n = t.n_instances;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut best: Option<(f64, usize)> = None;
        for j in 0..n {
            if folds.fold_of[j] == folds.fold_of[i] {
                continue;
            }
            let d: f64 = slices.iter().map(|s| s[i * n + j]).sum();
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, j));
            }
        }
        match best {
            Some((_, j)) => out.push(labels[j]),
            None => {
                return Err(Error::InvalidArgument(format!(
                    "fold {} has an empty complement",
                    folds.fold_of[i]
                )))
            }
        }
    }
    Ok(out)
}

/// Per-feature CV predictions with one shared fold assignment; rows may be
/// computed in parallel, the result is identical either way.
pub fn single_feature_predictions(
    t: &DistanceTensor,
    labels: &[usize],
    folds: &FoldAssignment,
) -> Result<PredictionMatrix> {
    check_consistency(t, labels, &[0], folds)?;
    let rows: Vec<Vec<usize>> = {
        #[cfg(feature = "parallel")]
        {
            (0..t.n_features)
                .into_par_iter()
                .map(|f| cv_predict_subset(t, labels, &[f], folds))
                .collect::<Result<_>>()?
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..t.n_features)
                .map(|f| cv_predict_subset(t, labels, &[f], folds))
                .collect::<Result<_>>()?
        }
    };
    Ok(PredictionMatrix {
        predicted: rows.concat(),
        n_features: t.n_features,
        n_instances: t.n_instances,
        folds: folds.clone(),
    })
}

/// Sequential fallback of `single_feature_predictions`.
pub fn single_feature_predictions_serial(
    t: &DistanceTensor,
    labels: &[usize],
    folds: &FoldAssignment,
) -> Result<PredictionMatrix> {
    check_consistency(t, labels, &[0], folds)?;
    let rows: Vec<Vec<usize>> = (0..t.n_features)
        .map(|f| cv_predict_subset(t, labels, &[f], folds))
        .collect::<Result<_>>()?;
    Ok(PredictionMatrix {
        predicted: rows.concat(),
        n_features: t.n_features,
        n_instances: t.n_instances,
        folds: folds.clone(),
    })
}

/// Fraction of cross-validated predictions that match the labels.
pub fn cv_accuracy(
    t: &DistanceTensor,
    labels: &[usize],
    subset: &[usize],
    folds: &FoldAssignment,
) -> Result<f64> {
    let predicted = cv_predict_subset(t, labels, subset, folds)?;
    let hits = predicted
        .iter()
        .zip(labels)
        .filter(|(p, l)| p == l)
        .count();
    Ok(hits as f64 / labels.len() as f64)
}

fn argmin_row(row: &[f64]) -> usize {
    let mut best = 0;
    for (j, &d) in row.iter().enumerate().skip(1) {
        if d < row[best] {
            best = j;
        }
    }
    best
}

/// Held-out 1NN accuracy of a feature subset. `LookupSum` sums per-feature
/// univariate DTW costs; `Dependent` runs exact multichannel DTW over the
/// subset's channels. Ties go to the smallest train index.
pub fn test_accuracy(
    train: &TimeSeriesDataset,
    test: &TimeSeriesDataset,
    subset: &[usize],
    params: WarpingParams,
    mode: EvalMode,
) -> Result<f64> {
    check_schema(train, test)?;
    let nearest: Vec<usize> = match mode {
        EvalMode::LookupSum => cross_distance(train, test, subset, params)?
            .iter()
            .map(|row| argmin_row(row))
            .collect(),
        EvalMode::Dependent => {
            if subset.is_empty() {
                return Err(Error::InvalidArgument("empty feature subset".into()));
            }
            if let Some(&f) = subset.iter().find(|&&f| f >= train.n_features()) {
                return Err(Error::InvalidArgument(format!(
                    "feature index {f} out of range (dataset has {})",
                    train.n_features()
                )));
            }
            let per_test = |i: usize| -> Vec<f64> {
                let a = test.channels(i, subset);
                (0..train.n_instances())
                    .map(|j| {
                        dtw_dependent(&a, &train.channels(j, subset), params)
                            .expect("validated channels cannot fail")
                    })
                    .collect()
            };
            #[cfg(feature = "parallel")]
            {
                (0..test.n_instances())
                    .into_par_iter()
                    .map(|i| argmin_row(&per_test(i)))
                    .collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..test.n_instances()).map(|i| argmin_row(&per_test(i))).collect()
            }
        }
    };
    let hits = nearest
        .iter()
        .enumerate()
        .filter(|(i, &j)| test.label(*i) == train.label(j))
        .count();
    Ok(hits as f64 / test.n_instances() as f64)
}
