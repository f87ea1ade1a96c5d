//! Merit scoring: class relevance of a subset discounted by its internal
//! redundancy,
//!
//!   M(S) = k·mean(cf) / sqrt(k + k(k−1)·mean(ff)),
//!
//! where cf averages feature-class correlation over the subset and ff
//! averages feature-feature correlation over its unordered pairs.

use serde::Serialize;

use crate::classify::PredictionMatrix;
use crate::error::{Error, Result};
use crate::info::ami;

/// Feature-class and feature-feature correlations, precomputed so merit
/// evaluation is a cheap lookup.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationModel {
    /// feature-class correlation per feature
    pub cf: Vec<f64>,
    /// symmetric feature-feature correlation matrix, unit diagonal
    pub ff: Vec<Vec<f64>>,
}

impl CorrelationModel {
    pub fn n_features(&self) -> usize {
        self.cf.len()
    }
}

/// Merit of a subset given correlation tables. With `clamp`, cf/ff entries
/// are clipped into [0,1] as they are read, which keeps the radicand at
/// least k.
pub fn merit(subset: &[usize], cf: &[f64], ff: &[Vec<f64>], clamp: bool) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::InvalidArgument("empty feature subset".into()));
    }
    if let Some(&f) = subset.iter().find(|&&f| f >= cf.len()) {
        return Err(Error::InvalidArgument(format!(
            "feature index {f} not covered by correlation tables ({} features)",
            cf.len()
        )));
    }
    let val = |x: f64| if clamp { x.clamp(0.0, 1.0) } else { x };
    let k = subset.len() as f64;
    let mean_cf = subset.iter().map(|&f| val(cf[f])).sum::<f64>() / k;
    if subset.len() == 1 {
        return Ok(mean_cf);
    }
    let mut sum_ff = 0.0;
    for (idx, &a) in subset.iter().enumerate() {
        for &b in &subset[idx + 1..] {
            sum_ff += val(ff[a][b]);
        }
    }
    let pairs = k * (k - 1.0) / 2.0;
    let mean_ff = sum_ff / pairs;
    let radicand = k + k * (k - 1.0) * mean_ff;
    if radicand <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "non-positive merit radicand {radicand} (unclamped negative correlations)"
        )));
    }
    Ok(k * mean_cf / radicand.sqrt())
}

/// Adjusted-MI correlations from single-feature CV predictions: cf against
/// the true labels, ff between prediction rows. Negative chance-level
/// scores are clamped to zero and the diagonal is pinned to one.
pub fn build_correlation_model(pm: &PredictionMatrix, labels: &[usize]) -> Result<CorrelationModel> {
    if labels.len() != pm.n_instances {
        return Err(Error::InvalidArgument(format!(
            "prediction matrix covers {} instances, labels {}",
            pm.n_instances,
            labels.len()
        )));
    }
    let n = pm.n_features;
    let mut cf = Vec::with_capacity(n);
    for f in 0..n {
        cf.push(ami(labels, pm.row(f))?.clamp(0.0, 1.0));
    }
    let mut ff = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = ami(pm.row(i), pm.row(j))?.clamp(0.0, 1.0);
            ff[i][j] = v;
            ff[j][i] = v;
        }
    }
    Ok(CorrelationModel { cf, ff })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ff_const(n: usize, v: f64) -> Vec<Vec<f64>> {
        let mut ff = vec![vec![v; n]; n];
        for (i, row) in ff.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        ff
    }

    #[test]
    fn singleton_merit_is_cf() {
        let cf = vec![0.6, 0.2];
        assert_eq!(merit(&[0], &cf, &ff_const(2, 0.5), false).unwrap(), 0.6);
    }

    #[test]
    fn fully_redundant_pair() {
        // k=2, cf both 0.5, ff=1: 2*0.5/sqrt(2+2) = 0.5
        let m = merit(&[0, 1], &[0.5, 0.5], &ff_const(2, 1.0), false).unwrap();
        assert!((m - 0.5).abs() < 1e-15);
    }

    #[test]
    fn redundancy_free_pair_beats_either_alone() {
        // k=2, cf both 0.5, ff=0: 1/sqrt(2)
        let m = merit(&[0, 1], &[0.5, 0.5], &ff_const(2, 0.0), false).unwrap();
        assert!((m - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(m > 0.5);
    }

    #[test]
    fn clamp_handles_negative_correlations() {
        let cf = vec![-0.2, 0.5];
        let ff = ff_const(2, -0.4);
        let clamped = merit(&[0, 1], &cf, &ff, true).unwrap();
        // negative cf reads as 0, negative ff as 0
        assert!((clamped - (0.5 / 2.0f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn unclamped_negative_ff_can_poison_radicand() {
        let cf = vec![0.5; 3];
        let ff = ff_const(3, -1.0);
        // radicand = 3 + 6*(-1) = -3
        assert!(merit(&[0, 1, 2], &cf, &ff, false).is_err());
        assert!(merit(&[0, 1, 2], &cf, &ff, true).is_ok());
    }

    #[test]
    fn merit_validates_subset() {
        let cf = vec![0.5, 0.5];
        let ff = ff_const(2, 0.0);
        assert!(merit(&[], &cf, &ff, false).is_err());
        assert!(merit(&[2], &cf, &ff, false).is_err());
    }

    #[test]
    fn merit_invariant_under_subset_order() {
        let cf = vec![0.3, 0.7, 0.5, 0.9];
        let mut ff = ff_const(4, 0.0);
        ff[0][1] = 0.2;
        ff[1][0] = 0.2;
        ff[2][3] = 0.8;
        ff[3][2] = 0.8;
        let a = merit(&[0, 1, 3], &cf, &ff, false).unwrap();
        let b = merit(&[3, 0, 1], &cf, &ff, false).unwrap();
        assert_eq!(a, b);
    }
}
