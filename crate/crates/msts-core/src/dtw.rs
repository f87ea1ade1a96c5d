//! Dynamic time warping kernels.
//!
//! Pointwise cost is the squared difference and the returned value is the
//! accumulated cost along the optimal monotone path (no square root). This
//! convention is load-bearing: per-feature costs are later summed across
//! channels, so a monotone transform of individual costs would change
//! subset rankings.

use crate::error::{Error, Result};

/// Sakoe-Chiba band parameters. `window` is the band half-width in
/// samples; `None` means unconstrained. A negative width is
/// unrepresentable by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WarpingParams {
    pub window: Option<usize>,
}

impl WarpingParams {
    pub const UNCONSTRAINED: WarpingParams = WarpingParams { window: None };

    pub fn windowed(window: usize) -> Self {
        WarpingParams {
            window: Some(window),
        }
    }
}

/// Core DP over an m×n alignment grid with step set {diag, up, left} and
/// boundary D(0,0) = cost(0,0). `cost(i, j)` supplies the pointwise cost.
fn dtw_grid(m: usize, n: usize, window: Option<usize>, cost: impl Fn(usize, usize) -> f64) -> f64 {
    let w = window.unwrap_or(usize::MAX);
    let mut prev = vec![f64::INFINITY; n];
    let mut curr = vec![f64::INFINITY; n];
    for i in 0..m {
        curr.fill(f64::INFINITY);
        let lo = i.saturating_sub(w);
        let hi = i.saturating_add(w).min(n - 1);
        for j in lo..=hi {
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 {
                    prev[j - 1]
                } else {
                    f64::INFINITY
                };
                let up = if i > 0 { prev[j] } else { f64::INFINITY };
                let left = if j > 0 { curr[j - 1] } else { f64::INFINITY };
                diag.min(up).min(left)
            };
            curr[j] = best + cost(i, j);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[n - 1]
}

fn check_window(len_a: usize, len_b: usize, params: WarpingParams) -> Result<()> {
    if let Some(w) = params.window {
        let gap = len_a.abs_diff(len_b);
        if w < gap {
            return Err(Error::InvalidArgument(format!(
                "warping window {w} cannot bridge length difference {gap}"
            )));
        }
    }
    Ok(())
}

/// DTW cost between two univariate sequences.
pub fn dtw_univariate(a: &[f64], b: &[f64], params: WarpingParams) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("empty sequence".into()));
    }
    check_window(a.len(), b.len(), params)?;
    Ok(dtw_grid(a.len(), b.len(), params.window, |i, j| {
        let d = a[i] - b[j];
        d * d
    }))
}

fn check_channels(a: &[&[f64]], b: &[&[f64]]) -> Result<(usize, usize)> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "channel count mismatch ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::InvalidArgument("no channels".into()));
    }
    let (la, lb) = (a[0].len(), b[0].len());
    if la == 0 || lb == 0 {
        return Err(Error::InvalidArgument("empty sequence".into()));
    }
    if a.iter().any(|c| c.len() != la) || b.iter().any(|c| c.len() != lb) {
        return Err(Error::InvalidArgument(
            "channels within one series differ in length".into(),
        ));
    }
    Ok((la, lb))
}

/// Dependent multichannel DTW: one shared warping path, pointwise cost is
/// the squared Euclidean distance across channels at the aligned points.
pub fn dtw_dependent(a: &[&[f64]], b: &[&[f64]], params: WarpingParams) -> Result<f64> {
    let (la, lb) = check_channels(a, b)?;
    check_window(la, lb, params)?;
    Ok(dtw_grid(la, lb, params.window, |i, j| {
        a.iter()
            .zip(b)
            .map(|(ca, cb)| {
                let d = ca[i] - cb[j];
                d * d
            })
            .sum()
    }))
}

/// Independent multichannel DTW: each channel warps on its own, costs sum.
pub fn dtw_independent(a: &[&[f64]], b: &[&[f64]], params: WarpingParams) -> Result<f64> {
    check_channels(a, b)?;
    let mut total = 0.0;
    for (ca, cb) in a.iter().zip(b) {
        total += dtw_univariate(ca, cb, params)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    const NOW: WarpingParams = WarpingParams::UNCONSTRAINED;

    #[test]
    fn identical_sequences_cost_zero() {
        assert_eq!(dtw_univariate(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], NOW).unwrap(), 0.0);
    }

    #[test]
    fn single_cell_squared_diff() {
        assert_eq!(dtw_univariate(&[0.0], &[3.0], NOW).unwrap(), 9.0);
    }

    #[test]
    fn shifted_ramp() {
        // hand-unrolled DP: optimal path pays (1-2)^2 at entry and (3-4)^2
        // at exit, warping the middle for free
        let c = dtw_univariate(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0], NOW).unwrap();
        assert_eq!(c, 2.0);
    }

    #[test]
    fn symmetry() {
        let a = [0.3, -1.2, 4.0, 4.0, 0.0];
        let b = [2.0, 2.0, -0.5, 1.0, 1.5];
        let ab = dtw_univariate(&a, &b, NOW).unwrap();
        let ba = dtw_univariate(&b, &a, NOW).unwrap();
        assert_eq!(ab, ba);
    }

    #[test]
    fn empty_errors() {
        assert!(dtw_univariate(&[], &[1.0], NOW).is_err());
        assert!(dtw_univariate(&[1.0], &[], NOW).is_err());
    }

    #[test]
    fn window_zero_is_pointwise_sum() {
        // band of width 0 forces the diagonal path
        let a = [1.0, 5.0, 2.0];
        let b = [0.0, 3.0, 4.0];
        let c = dtw_univariate(&a, &b, WarpingParams::windowed(0)).unwrap();
        assert_eq!(c, 1.0 + 4.0 + 4.0);
    }

    #[test]
    fn window_never_cheaper_than_unconstrained() {
        let a = [1.0, 2.0, 3.0, 2.0, 1.0];
        let b = [3.0, 2.0, 1.0, 2.0, 3.0];
        let free = dtw_univariate(&a, &b, NOW).unwrap();
        for w in 0..5 {
            let banded = dtw_univariate(&a, &b, WarpingParams::windowed(w)).unwrap();
            assert!(banded >= free, "w={w}: {banded} < {free}");
        }
        // wide enough band recovers the unconstrained cost
        assert_eq!(dtw_univariate(&a, &b, WarpingParams::windowed(4)).unwrap(), free);
    }

    #[test]
    fn window_narrower_than_length_gap_errors() {
        assert!(dtw_univariate(&[1.0, 2.0, 3.0], &[1.0], WarpingParams::windowed(1)).is_err());
    }

    #[test]
    fn dependent_single_channel_collapses_to_univariate() {
        let a = [1.0, 2.0, 3.0];
        let b = [2.0, 3.0, 4.0];
        let uni = dtw_univariate(&a, &b, NOW).unwrap();
        let dep = dtw_dependent(&[&a], &[&b], NOW).unwrap();
        assert_eq!(uni, dep);
    }

    #[test]
    fn dependent_zero_channel_adds_nothing() {
        let z = [0.0, 0.0, 0.0];
        let a = [1.0, 2.0, 3.0];
        let b = [2.0, 3.0, 4.0];
        let dep = dtw_dependent(&[&a, &z], &[&b, &z], NOW).unwrap();
        assert_eq!(dep, 2.0);
    }

    #[test]
    fn dependent_equal_inputs_zero() {
        let a = [1.0, -2.0, 0.5];
        let b = [0.0, 0.25, 9.0];
        assert_eq!(dtw_dependent(&[&a, &b], &[&a, &b], NOW).unwrap(), 0.0);
    }

    #[test]
    fn dependent_channel_mismatch_errors() {
        let a = [1.0, 2.0];
        assert!(dtw_dependent(&[&a, &a], &[&a], NOW).is_err());
    }

    #[test]
    fn independent_sums_per_channel_costs() {
        let a1 = [1.0, 2.0, 3.0];
        let a2 = [1.0, 2.0, 3.0];
        let b1 = [2.0, 3.0, 4.0];
        let b2 = [3.0, 4.0, 5.0];
        // second pair hand-unrolled: every path pays 4 at each endpoint and
        // the cheapest interior is 1+0+1, so D = 10
        let c = dtw_independent(&[&a1, &a2], &[&b1, &b2], NOW).unwrap();
        assert_eq!(c, 2.0 + 10.0);
    }

    #[test]
    fn independent_duplicated_channels_double() {
        let a = [0.0, 1.0, 4.0];
        let b = [1.0, 1.0, 2.0];
        let single = dtw_univariate(&a, &b, NOW).unwrap();
        let both = dtw_independent(&[&a, &a], &[&b, &b], NOW).unwrap();
        assert_eq!(both, 2.0 * single);
    }

    #[test]
    fn independent_single_channel_matches_dependent() {
        let a = [0.5, 0.1, 0.9, 0.9];
        let b = [0.0, 0.0, 1.0, 0.5];
        let ind = dtw_independent(&[&a], &[&b], NOW).unwrap();
        let dep = dtw_dependent(&[&a], &[&b], NOW).unwrap();
        assert_eq!(ind, dep);
    }
}
