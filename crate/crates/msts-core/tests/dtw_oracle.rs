//! DTW dynamic program against a brute-force path enumerator.
//!
//! The enumerator walks every monotone path from (0,0) to (m-1,n-1) and
//! accumulates cell costs in path order. The DP adds cells in the same
//! order along its argmin path and IEEE addition is monotone, so on short
//! sequences the two must agree bit for bit, not just approximately.

use msts_core::dtw::{dtw_dependent, dtw_independent, dtw_univariate, WarpingParams};
use proptest::prelude::*;

fn in_band(i: usize, j: usize, window: Option<usize>) -> bool {
    window.map_or(true, |w| i.abs_diff(j) <= w)
}

fn walk(a: &[f64], b: &[f64], window: Option<usize>, i: usize, j: usize, acc: f64, best: &mut f64) {
    let d = a[i] - b[j];
    let acc = acc + d * d;
    if i + 1 == a.len() && j + 1 == b.len() {
        if acc < *best {
            *best = acc;
        }
        return;
    }
    if i + 1 < a.len() && j + 1 < b.len() && in_band(i + 1, j + 1, window) {
        walk(a, b, window, i + 1, j + 1, acc, best);
    }
    if i + 1 < a.len() && in_band(i + 1, j, window) {
        walk(a, b, window, i + 1, j, acc, best);
    }
    if j + 1 < b.len() && in_band(i, j + 1, window) {
        walk(a, b, window, i, j + 1, acc, best);
    }
}

fn brute_force(a: &[f64], b: &[f64], window: Option<usize>) -> f64 {
    let mut best = f64::INFINITY;
    walk(a, b, window, 0, 0, 0.0, &mut best);
    best
}

fn series(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, 1..=max_len)
}

proptest! {
    #[test]
    fn dp_matches_path_enumeration(a in series(6), b in series(6)) {
        let dp = dtw_univariate(&a, &b, WarpingParams::UNCONSTRAINED).unwrap();
        prop_assert_eq!(dp, brute_force(&a, &b, None));
    }

    #[test]
    fn windowed_dp_matches_path_enumeration(a in series(6), b in series(6), extra in 0usize..6) {
        // any window at least as wide as the length gap admits a path
        let w = a.len().abs_diff(b.len()) + extra;
        let dp = dtw_univariate(&a, &b, WarpingParams::windowed(w)).unwrap();
        prop_assert_eq!(dp, brute_force(&a, &b, Some(w)));
    }

    #[test]
    fn dp_is_symmetric(a in series(6), b in series(6)) {
        let ab = dtw_univariate(&a, &b, WarpingParams::UNCONSTRAINED).unwrap();
        let ba = dtw_univariate(&b, &a, WarpingParams::UNCONSTRAINED).unwrap();
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn narrowing_the_band_never_lowers_cost(a in series(6), b in series(6)) {
        let gap = a.len().abs_diff(b.len());
        let widest = gap + 6;
        let mut prev = dtw_univariate(&a, &b, WarpingParams::windowed(widest)).unwrap();
        for w in (gap..widest).rev() {
            let cost = dtw_univariate(&a, &b, WarpingParams::windowed(w)).unwrap();
            prop_assert!(cost >= prev, "w={} cost {} below w={} cost {}", w, cost, w + 1, prev);
            prev = cost;
        }
        let free = dtw_univariate(&a, &b, WarpingParams::UNCONSTRAINED).unwrap();
        prop_assert!(prev >= free);
    }

    #[test]
    fn wide_band_recovers_unconstrained(a in series(6), b in series(6)) {
        let w = a.len().max(b.len());
        let banded = dtw_univariate(&a, &b, WarpingParams::windowed(w)).unwrap();
        let free = dtw_univariate(&a, &b, WarpingParams::UNCONSTRAINED).unwrap();
        prop_assert_eq!(banded, free);
    }

    #[test]
    fn independent_sums_per_channel(chans in prop::collection::vec((series(5), series(5)), 1..=3)) {
        // channel pairs must share lengths within each series
        let len_a = chans[0].0.len();
        let len_b = chans[0].1.len();
        let a: Vec<Vec<f64>> = chans.iter().map(|(ca, _)| {
            ca.iter().cycle().take(len_a).copied().collect()
        }).collect();
        let b: Vec<Vec<f64>> = chans.iter().map(|(_, cb)| {
            cb.iter().cycle().take(len_b).copied().collect()
        }).collect();
        let a_refs: Vec<&[f64]> = a.iter().map(|c| c.as_slice()).collect();
        let b_refs: Vec<&[f64]> = b.iter().map(|c| c.as_slice()).collect();
        let ind = dtw_independent(&a_refs, &b_refs, WarpingParams::UNCONSTRAINED).unwrap();
        let mut total = 0.0;
        for (ca, cb) in a.iter().zip(&b) {
            total += dtw_univariate(ca, cb, WarpingParams::UNCONSTRAINED).unwrap();
        }
        prop_assert_eq!(ind, total);
    }

    #[test]
    fn dependent_single_channel_is_univariate(a in series(6), b in series(6)) {
        let dep = dtw_dependent(&[&a], &[&b], WarpingParams::UNCONSTRAINED).unwrap();
        let uni = dtw_univariate(&a, &b, WarpingParams::UNCONSTRAINED).unwrap();
        prop_assert_eq!(dep, uni);
    }

    #[test]
    fn cost_is_nonnegative_and_zero_on_self(a in series(6)) {
        let self_cost = dtw_univariate(&a, &a, WarpingParams::UNCONSTRAINED).unwrap();
        prop_assert_eq!(self_cost, 0.0);
        let shifted: Vec<f64> = a.iter().map(|v| v + 1.0).collect();
        prop_assert!(dtw_univariate(&a, &shifted, WarpingParams::UNCONSTRAINED).unwrap() >= 0.0);
    }
}

#[test]
fn enumerator_agrees_with_hand_unrolled_cases() {
    // guard the oracle itself against drift before trusting it above
    assert_eq!(brute_force(&[0.0], &[3.0], None), 9.0);
    assert_eq!(brute_force(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0], None), 2.0);
    assert_eq!(brute_force(&[1.0, 5.0, 2.0], &[0.0, 3.0, 4.0], Some(0)), 9.0);
}
