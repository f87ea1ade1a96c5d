//! Dataset plumbing properties: text round trips, fold stratification,
//! subsampling, projection, and parallel/serial agreement.

use msts_core::classify::{single_feature_predictions, single_feature_predictions_serial};
use msts_core::dataset::{
    parse_ts, project_features, serialize_ts, stratified_subsample, TimeSeriesDataset,
};
use msts_core::dtw::WarpingParams;
use msts_core::folds::{effective_fold_count, make_folds};
use msts_core::tensor::{
    compute_distance_tensor, compute_distance_tensor_serial, cross_distance,
    cross_distance_serial,
};
use proptest::prelude::*;

fn dataset(max_features: usize, max_len: usize, max_inst: usize) -> impl Strategy<Value = TimeSeriesDataset> {
    (1..=max_features, 1..=max_len, 2..=max_inst).prop_flat_map(|(nf, sl, ni)| {
        (
            prop::collection::vec(-50.0f64..50.0, ni * nf * sl),
            prop::collection::vec(0usize..3, ni),
            "[a-z]{1,8}",
        )
            .prop_map(move |(values, labels, name)| {
                TimeSeriesDataset::new(
                    name,
                    vec!["a".into(), "b".into(), "c".into()],
                    nf,
                    sl,
                    values,
                    labels,
                )
                .unwrap()
            })
    })
}

proptest! {
    #[test]
    fn serialize_parse_round_trip(ds in dataset(3, 4, 6)) {
        let back = parse_ts(&serialize_ts(&ds)).unwrap();
        prop_assert_eq!(back, ds);
    }

    #[test]
    fn folds_partition_and_stratify(ds in dataset(1, 1, 12), k in 2usize..5, seed in 0u64..50) {
        let labels = ds.labels();
        prop_assume!(k <= labels.len());
        let fa = make_folds(labels, k, seed).unwrap();
        prop_assert_eq!(fa.fold_of.len(), labels.len());
        // every fold non-empty
        let mut sizes = vec![0usize; k];
        for &f in &fa.fold_of {
            prop_assert!(f < k);
            sizes[f] += 1;
        }
        prop_assert!(sizes.iter().all(|&s| s > 0), "empty fold in {:?}", sizes);
        // within each class, fold counts differ by at most one
        for class in 0..3 {
            let mut per_fold = vec![0usize; k];
            for (i, &l) in labels.iter().enumerate() {
                if l == class {
                    per_fold[fa.fold_of[i]] += 1;
                }
            }
            let (lo, hi) = (per_fold.iter().min().unwrap(), per_fold.iter().max().unwrap());
            prop_assert!(hi - lo <= 1, "class {} spread {:?}", class, per_fold);
        }
        // deterministic per seed
        prop_assert_eq!(fa, make_folds(labels, k, seed).unwrap());
    }

    #[test]
    fn effective_fold_count_caps_at_smallest_class(ds in dataset(1, 1, 12), k in 2usize..12) {
        let labels = ds.labels();
        let eff = effective_fold_count(labels, k);
        let smallest = (0..3)
            .map(|c| labels.iter().filter(|&&l| l == c).count())
            .filter(|&c| c > 0)
            .min()
            .unwrap();
        prop_assert_eq!(eff, k.min(smallest));
    }

    #[test]
    fn subsample_keeps_rounded_class_fractions(
        ds in dataset(2, 3, 10),
        fraction in 0.05f64..=1.0,
        seed in 0u64..20,
    ) {
        let sub = stratified_subsample(&ds, fraction, seed).unwrap();
        let full = ds.class_counts();
        let kept = sub.class_counts();
        for (class, (&total, &got)) in full.iter().zip(&kept).enumerate() {
            if total == 0 {
                prop_assert_eq!(got, 0);
            } else {
                let want = ((fraction * total as f64).round() as usize).max(1);
                prop_assert_eq!(got, want, "class {}", class);
            }
        }
        // survivors keep their original relative order with intact channels
        let row = |d: &TimeSeriesDataset, i: usize| {
            (d.label(i), d.channel(i, 0).to_vec())
        };
        let mut cursor = 0;
        for i in 0..sub.n_instances() {
            let target = row(&sub, i);
            let mut found = false;
            while cursor < ds.n_instances() {
                let candidate = row(&ds, cursor);
                cursor += 1;
                if candidate == target {
                    found = true;
                    break;
                }
            }
            prop_assert!(found, "subsample row {} is not an ordered selection", i);
        }
    }

    #[test]
    fn full_fraction_subsample_is_identity(ds in dataset(2, 3, 8), seed in 0u64..20) {
        let sub = stratified_subsample(&ds, 1.0, seed).unwrap();
        prop_assert_eq!(sub, ds);
    }

    #[test]
    fn projection_then_projection_composes(ds in dataset(4, 3, 5)) {
        prop_assume!(ds.n_features() >= 3);
        let once = project_features(&ds, &[2, 0, 1]).unwrap();
        let twice = project_features(&once, &[1, 2]).unwrap();
        let direct = project_features(&ds, &[0, 1]).unwrap();
        prop_assert_eq!(twice, direct);
    }

    #[test]
    fn tensor_parallel_matches_serial(ds in dataset(3, 4, 6)) {
        let par = compute_distance_tensor(&ds, WarpingParams::UNCONSTRAINED).unwrap();
        let ser = compute_distance_tensor_serial(&ds, WarpingParams::UNCONSTRAINED).unwrap();
        prop_assert_eq!(par, ser);
    }

    #[test]
    fn predictions_parallel_matches_serial(ds in dataset(3, 3, 8)) {
        let t = compute_distance_tensor(&ds, WarpingParams::UNCONSTRAINED).unwrap();
        let folds = make_folds(ds.labels(), 2, 7).unwrap();
        let par = single_feature_predictions(&t, ds.labels(), &folds).unwrap();
        let ser = single_feature_predictions_serial(&t, ds.labels(), &folds).unwrap();
        prop_assert_eq!(par, ser);
    }

    #[test]
    fn cross_distance_parallel_matches_serial(train in dataset(3, 3, 5)) {
        // reuse the train set as its own test split; schemas match trivially
        let subset: Vec<usize> = (0..train.n_features()).collect();
        let par = cross_distance(&train, &train, &subset, WarpingParams::UNCONSTRAINED).unwrap();
        let ser =
            cross_distance_serial(&train, &train, &subset, WarpingParams::UNCONSTRAINED).unwrap();
        prop_assert_eq!(par, ser);
    }

    #[test]
    fn z_normalization_is_idempotent(ds in dataset(2, 4, 5)) {
        let once = ds.z_normalized();
        let twice = once.z_normalized();
        for i in 0..once.n_instances() {
            for f in 0..once.n_features() {
                for (a, b) in once.channel(i, f).iter().zip(twice.channel(i, f)) {
                    prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
                }
            }
        }
    }
}
