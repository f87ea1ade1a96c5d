//! Greedy forward subset search, used with two scoring criteria: merit
//! (cheap, correlation-model lookups) and wrapped CV accuracy (expensive).
//!
//! The search skeleton is shared. Size 1 fixes the baseline (best single
//! feature), size 2 evaluates every pair, and each later size extends the
//! incumbent by one feature. The loop accepts a step only on a strict
//! score improvement; the first non-improving step is recorded in the
//! trace and stops the search.

use serde::Serialize;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::merit::{merit, CorrelationModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Msts,
    Wrapper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    /// the size-2 step could not beat the best single feature
    #[serde(rename = "no pair beats best single")]
    NoPairBeatsSingle,
    /// a later extension step failed to improve the score
    #[serde(rename = "score stopped improving")]
    NoImprovement,
    /// every feature was selected before the score stopped improving
    #[serde(rename = "all features selected")]
    AllFeaturesSelected,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub size: usize,
    pub candidates_evaluated: usize,
    pub subset: Vec<usize>,
    pub score: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionTrace {
    pub steps: Vec<TraceStep>,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub method: Method,
    pub subset: Vec<usize>,
    pub trace: SelectionTrace,
    /// user+system CPU seconds of the selection phase; filled by the
    /// caller that owns the timing boundary, zero until then
    pub cpu_time_seconds: f64,
    pub test_accuracy: Option<f64>,
}

/// One scored candidate subset, in evaluation order.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRecord {
    pub subset: Vec<usize>,
    pub score: f64,
}

/// How candidate scoring is dispatched. Merit scores are closed-form
/// arithmetic over a precomputed model, so fanning them out to the thread
/// pool costs more than the scoring itself; accuracy oracles run a full CV
/// pass per candidate and are worth going wide for.
#[derive(Clone, Copy)]
enum Scoring {
    Inline,
    Threaded,
}

fn score_all<S>(
    candidates: Vec<Vec<usize>>,
    score: &S,
    scoring: Scoring,
) -> Result<Vec<CandidateRecord>>
where
    S: Fn(&[usize]) -> Result<f64> + Sync,
{
    let scores: Result<Vec<f64>> = match scoring {
        Scoring::Inline => candidates.iter().map(|c| score(c)).collect(),
        Scoring::Threaded => {
            #[cfg(feature = "parallel")]
            {
                candidates.par_iter().map(|c| score(c)).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                candidates.iter().map(|c| score(c)).collect()
            }
        }
    };
    Ok(candidates
        .into_iter()
        .zip(scores?)
        .map(|(subset, score)| CandidateRecord { subset, score })
        .collect())
}

/// Highest score wins; among equal scores the lexicographically smallest
/// subset wins. Candidates are already sorted ascending internally.
fn best_candidate(records: &[CandidateRecord]) -> CandidateRecord {
    let mut best = &records[0];
    for r in &records[1..] {
        if r.score > best.score || (r.score == best.score && r.subset < best.subset) {
            best = r;
        }
    }
    best.clone()
}

fn all_pairs(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push(vec![i, j]);
        }
    }
    out
}

fn extensions(incumbent: &[usize], n: usize) -> Vec<Vec<usize>> {
    (0..n)
        .filter(|f| !incumbent.contains(f))
        .map(|f| {
            let mut s = incumbent.to_vec();
            s.push(f);
            s.sort_unstable();
            s
        })
        .collect()
}

fn greedy_forward<S>(
    n: usize,
    method: Method,
    score: S,
    scoring: Scoring,
) -> Result<(SelectionResult, Vec<CandidateRecord>)>
where
    S: Fn(&[usize]) -> Result<f64> + Sync,
{
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "selection needs at least 2 features, got {n}"
        )));
    }
    let mut all_candidates: Vec<CandidateRecord> = Vec::new();
    let mut steps: Vec<TraceStep> = Vec::new();

    // size 1: fix the baseline
    let singles = score_all((0..n).map(|f| vec![f]).collect(), &score, scoring)?;
    let mut incumbent = best_candidate(&singles);
    steps.push(TraceStep {
        size: 1,
        candidates_evaluated: singles.len(),
        subset: incumbent.subset.clone(),
        score: incumbent.score,
        accepted: true,
    });
    all_candidates.extend(singles);

    let stop_reason = loop {
        let size = incumbent.subset.len() + 1;
        let candidates = if size == 2 {
            all_pairs(n)
        } else {
            extensions(&incumbent.subset, n)
        };
        let records = score_all(candidates, &score, scoring)?;
        let best = best_candidate(&records);
        let accepted = best.score > incumbent.score;
        steps.push(TraceStep {
            size,
            candidates_evaluated: records.len(),
            subset: best.subset.clone(),
            score: best.score,
            accepted,
        });
        all_candidates.extend(records);
        if !accepted {
            break if size == 2 {
                StopReason::NoPairBeatsSingle
            } else {
                StopReason::NoImprovement
            };
        }
        incumbent = best;
        if incumbent.subset.len() == n {
            break StopReason::AllFeaturesSelected;
        }
    };

    let result = SelectionResult {
        method,
        subset: incumbent.subset,
        trace: SelectionTrace { steps, stop_reason },
        cpu_time_seconds: 0.0,
        test_accuracy: None,
    };
    Ok((result, all_candidates))
}

/// Greedy forward selection by merit over a correlation model.
pub fn msts_select(model: &CorrelationModel) -> Result<SelectionResult> {
    Ok(msts_select_with_candidates(model)?.0)
}

/// `msts_select` plus every candidate subset scored along the way, for
/// merit-versus-accuracy traces.
pub fn msts_select_with_candidates(
    model: &CorrelationModel,
) -> Result<(SelectionResult, Vec<CandidateRecord>)> {
    greedy_forward(
        model.n_features(),
        Method::Msts,
        |s| merit(s, &model.cf, &model.ff, true),
        Scoring::Inline,
    )
}

/// Greedy forward selection scored by an accuracy oracle (the wrapper
/// strategy). The oracle sees each candidate subset in ascending order.
pub fn wrapper_select<O>(n_features: usize, accuracy_oracle: O) -> Result<SelectionResult>
where
    O: Fn(&[usize]) -> f64 + Sync,
{
    Ok(greedy_forward(
        n_features,
        Method::Wrapper,
        |s| Ok(accuracy_oracle(s)),
        Scoring::Threaded,
    )?
    .0)
}

/// Global best merit subset of exactly size k, by full enumeration in
/// lexicographic order. Test oracle and small-n reference; guarded so the
/// combination count stays sane.
pub fn exhaustive_best_merit(model: &CorrelationModel, k: usize) -> Result<(Vec<usize>, f64)> {
    let n = model.n_features();
    if n > 20 {
        return Err(Error::InvalidArgument(format!(
            "exhaustive search limited to 20 features, got {n}"
        )));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "subset size {k} out of range for {n} features"
        )));
    }
    let mut combo: Vec<usize> = (0..k).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        let score = merit(&combo, &model.cf, &model.ff, true)?;
        if best.as_ref().map_or(true, |(_, b)| score > *b) {
            best = Some((combo.clone(), score));
        }
        // advance to the lexicographic successor
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(best.unwrap());
            }
            i -= 1;
            if combo[i] != i + n - k {
                break;
            }
        }
        combo[i] += 1;
        for j in i + 1..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
}
