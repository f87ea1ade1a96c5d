//! Tabular comparison of two merit flavours: symmetrical uncertainty on
//! raw attribute columns versus adjusted MI on single-attribute classifier
//! outputs, scored over random attribute subsets.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::folds::FoldAssignment;
use crate::info::{ami, pearson, symmetrical_uncertainty};
use crate::merit::merit;
use crate::tabular::TabularDataset;

/// Paired merit scores over sampled subsets plus their correlation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeritComparison {
    pub subsets: Vec<Vec<usize>>,
    pub original_merit: Vec<f64>,
    pub proposed_merit: Vec<f64>,
    pub pearson_r: f64,
}

fn check_attribute(tds: &TabularDataset, attribute: usize) -> Result<()> {
    if attribute >= tds.n_attributes() {
        return Err(Error::InvalidArgument(format!(
            "attribute index {attribute} out of range (table has {})",
            tds.n_attributes()
        )));
    }
    Ok(())
}

fn check_folds(tds: &TabularDataset, folds: &FoldAssignment) -> Result<()> {
    if folds.fold_of.len() != tds.n_instances() {
        return Err(Error::InvalidArgument(format!(
            "folds cover {} instances, table has {}",
            folds.fold_of.len(),
            tds.n_instances()
        )));
    }
    Ok(())
}

/// 1R-style cross-validated predictions for one attribute: per fold, each
/// attribute value votes the majority class of the training rows sharing
/// it; values unseen in training fall back to the fold's overall majority
/// class. Ties go to the smallest class id.
pub fn single_attribute_predict(
    tds: &TabularDataset,
    attribute: usize,
    folds: &FoldAssignment,
) -> Result<Vec<usize>> {
    check_attribute(tds, attribute)?;
    check_folds(tds, folds)?;
    let n = tds.n_instances();
    let n_classes = tds.class_names.len();
    let labels = tds.labels();
    let mut out = vec![0usize; n];
    for fold in 0..folds.k {
        // class counts per attribute value over the training complement
        let mut per_value: HashMap<usize, Vec<usize>> = HashMap::new();
        let mut overall = vec![0usize; n_classes];
        for i in 0..n {
            if folds.fold_of[i] == fold {
                continue;
            }
            let counts = per_value
                .entry(tds.value(i, attribute))
                .or_insert_with(|| vec![0; n_classes]);
            counts[labels[i]] += 1;
            overall[labels[i]] += 1;
        }
        if per_value.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "fold {fold} has an empty complement"
            )));
        }
        let majority = |counts: &[usize]| -> usize {
            let mut best = 0;
            for (c, &v) in counts.iter().enumerate().skip(1) {
                if v > counts[best] {
                    best = c;
                }
            }
            best
        };
        let fallback = majority(&overall);
        for i in 0..n {
            if folds.fold_of[i] != fold {
                continue;
            }
            out[i] = per_value
                .get(&tds.value(i, attribute))
                .map_or(fallback, |c| majority(c));
        }
    }
    Ok(out)
}

/// Hall-style merit on raw attribute columns, with symmetrical uncertainty
/// as the correlation measure.
pub fn original_merit(tds: &TabularDataset, subset: &[usize]) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::InvalidArgument("empty attribute subset".into()));
    }
    for &a in subset {
        check_attribute(tds, a)?;
    }
    let columns: Vec<Vec<usize>> = subset.iter().map(|&a| tds.column(a)).collect();
    let (cf, ff) = correlation_tables(&columns, tds.labels(), symmetrical_uncertainty)?;
    let rel: Vec<usize> = (0..subset.len()).collect();
    merit(&rel, &cf, &ff, false)
}

/// Classifier-output merit: adjusted MI between single-attribute CV
/// predictions (and the class labels), clamped like the time-series path.
pub fn proposed_merit(
    tds: &TabularDataset,
    subset: &[usize],
    folds: &FoldAssignment,
) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::InvalidArgument("empty attribute subset".into()));
    }
    let predictions: Vec<Vec<usize>> = subset
        .iter()
        .map(|&a| single_attribute_predict(tds, a, folds))
        .collect::<Result<_>>()?;
    let (cf, ff) = correlation_tables(&predictions, tds.labels(), |x, y| {
        Ok(ami(x, y)?.clamp(0.0, 1.0))
    })?;
    let rel: Vec<usize> = (0..subset.len()).collect();
    merit(&rel, &cf, &ff, true)
}

fn correlation_tables<F>(
    columns: &[Vec<usize>],
    labels: &[usize],
    corr: F,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)>
where
    F: Fn(&[usize], &[usize]) -> Result<f64>,
{
    let k = columns.len();
    let mut cf = Vec::with_capacity(k);
    for col in columns {
        cf.push(corr(labels, col)?);
    }
    let mut ff = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let v = corr(&columns[i], &columns[j])?;
            ff[i][j] = v;
            ff[j][i] = v;
        }
    }
    Ok((cf, ff))
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

/// Sample `count` distinct subsets of the given size and score each with
/// both merit variants. Deterministic per seed.
pub fn compare_random_subsets(
    tds: &TabularDataset,
    subset_size: usize,
    count: usize,
    seed: u64,
    folds: &FoldAssignment,
) -> Result<MeritComparison> {
    let n = tds.n_attributes();
    if subset_size == 0 || subset_size > n {
        return Err(Error::InvalidArgument(format!(
            "subset size {subset_size} out of range for {n} attributes"
        )));
    }
    if count < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 subsets for a correlation".into(),
        ));
    }
    if (count as u128) > binomial(n, subset_size) {
        return Err(Error::InvalidArgument(format!(
            "count {count} exceeds the {} distinct subsets of size {subset_size}",
            binomial(n, subset_size)
        )));
    }
    check_folds(tds, folds)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..n).collect();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut subsets: Vec<Vec<usize>> = Vec::with_capacity(count);
    while subsets.len() < count {
        pool.shuffle(&mut rng);
        let mut s: Vec<usize> = pool[..subset_size].to_vec();
        s.sort_unstable();
        if seen.insert(s.clone()) {
            subsets.push(s);
        }
    }

    let score_pair = |s: &Vec<usize>| -> Result<(f64, f64)> {
        Ok((original_merit(tds, s)?, proposed_merit(tds, s, folds)?))
    };
    #[cfg(feature = "parallel")]
    let scored: Result<Vec<(f64, f64)>> = subsets.par_iter().map(score_pair).collect();
    #[cfg(not(feature = "parallel"))]
    let scored: Result<Vec<(f64, f64)>> = subsets.iter().map(score_pair).collect();
    let (original, proposed): (Vec<f64>, Vec<f64>) = scored?.into_iter().unzip();

    let pearson_r = pearson(&original, &proposed)?;
    Ok(MeritComparison {
        subsets,
        original_merit: original,
        proposed_merit: proposed,
        pearson_r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::folds::make_folds;
    use crate::tabular::parse_tabular;

    /// 8 rows where attribute 0 equals the class, attribute 1 is constant,
    /// attribute 2 is noise.
    fn toy() -> TabularDataset {
        parse_tabular(
            "p,z,m,c0\np,z,n,c0\np,z,m,c0\np,z,n,c0\nq,z,m,c1\nq,z,n,c1\nq,z,m,c1\nq,z,n,c1\n",
            3,
        )
        .unwrap()
    }

    #[test]
    fn perfect_attribute_predicts_labels() {
        let tds = toy();
        let folds = make_folds(tds.labels(), 4, 0).unwrap();
        let pred = single_attribute_predict(&tds, 0, &folds).unwrap();
        assert_eq!(pred, tds.labels());
    }

    #[test]
    fn constant_attribute_predicts_fold_majority() {
        let tds = toy();
        let folds = make_folds(tds.labels(), 4, 0).unwrap();
        let pred = single_attribute_predict(&tds, 1, &folds).unwrap();
        // balanced classes: majority ties resolve to class 0
        assert_eq!(pred, vec![0; 8]);
    }

    #[test]
    fn majority_map_matches_hand_count() {
        // attribute value m: 2 of c0, 2 of c1 in full data; with fold 0
        // removed the counts shift
        let tds = parse_tabular(
            "m,c0\nm,c0\nm,c1\nn,c1\nn,c1\nn,c0\nm,c1\nn,c0\n",
            1,
        )
        .unwrap();
        let folds = FoldAssignment {
            fold_of: vec![0, 0, 0, 0, 1, 1, 1, 1],
            k: 2,
            seed: 0,
        };
        let pred = single_attribute_predict(&tds, 0, &folds).unwrap();
        // training for fold 0 = rows 4..8: m -> c1 (1 vote), n -> c0 (2-1)
        assert_eq!(&pred[..4], &[1, 1, 1, 0]);
        // training for fold 1 = rows 0..4: m -> c0 (2-1), n -> c1 (1 vote)
        assert_eq!(&pred[4..], &[1, 1, 0, 1]);
    }

    #[test]
    fn unseen_value_falls_back_to_majority() {
        let tds = parse_tabular("a,c0\na,c0\na,c0\nb,c1\n", 1).unwrap();
        let folds = FoldAssignment {
            fold_of: vec![0, 1, 1, 0],
            k: 2,
            seed: 0,
        };
        // fold 0 training = rows 1,2 (both a,c0); row 3's value b is unseen
        let pred = single_attribute_predict(&tds, 0, &folds).unwrap();
        assert_eq!(pred[3], 0);
    }

    #[test]
    fn singleton_original_merit_is_su() {
        let tds = toy();
        let su = symmetrical_uncertainty(&tds.column(0), tds.labels()).unwrap();
        let m = original_merit(&tds, &[0]).unwrap();
        assert!((m - su).abs() < 1e-15);
        assert!((m - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicated_attribute_merit_collapses_to_singleton() {
        // attributes 0 and 1 are copies: ff=1, so merit = 2*su/sqrt(4) = su
        let tds = parse_tabular("x,x,c0\nx,x,c0\ny,y,c1\ny,y,c0\n", 2).unwrap();
        let single = original_merit(&tds, &[0]).unwrap();
        let pair = original_merit(&tds, &[0, 1]).unwrap();
        assert!((pair - single).abs() < 1e-12);
    }

    #[test]
    fn proposed_merit_perfect_singleton() {
        let tds = toy();
        let folds = make_folds(tds.labels(), 4, 0).unwrap();
        let m = proposed_merit(&tds, &[0], &folds).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
    }

    #[test]
    fn proposed_merit_duplicated_attributes() {
        let tds = parse_tabular("x,x,c0\nx,x,c0\ny,y,c1\ny,y,c1\n", 2).unwrap();
        let folds = make_folds(tds.labels(), 2, 0).unwrap();
        let single = proposed_merit(&tds, &[0], &folds).unwrap();
        let pair = proposed_merit(&tds, &[0, 1], &folds).unwrap();
        assert!((pair - single).abs() < 1e-12);
    }

    #[test]
    fn compare_is_deterministic_and_validates() {
        let tds = toy();
        let folds = make_folds(tds.labels(), 4, 0).unwrap();
        let a = compare_random_subsets(&tds, 2, 3, 11, &folds).unwrap();
        let b = compare_random_subsets(&tds, 2, 3, 11, &folds).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.subsets.len(), 3);
        assert!(a.pearson_r >= -1.0 && a.pearson_r <= 1.0);

        assert!(compare_random_subsets(&tds, 9, 2, 0, &folds).is_err());
        assert!(compare_random_subsets(&tds, 2, 1, 0, &folds).is_err());
        // only C(3,2)=3 distinct subsets exist
        assert!(compare_random_subsets(&tds, 2, 4, 0, &folds).is_err());
    }

    #[test]
    fn binomial_overflow_safe() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(35, 5), 324_632);
        assert_eq!(binomial(3, 5), 0);
    }
}
