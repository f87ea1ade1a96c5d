//! Discrete information metrics over label vectors.
//!
//! Everything here works on plain id vectors: any `usize` is a valid
//! category (including sentinel ids such as a tabular missing marker), and
//! only equality of ids matters. Entropies are in nats.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

/// Below this magnitude the adjusted-MI denominator is treated as zero.
const AMI_DENOM_EPS: f64 = 1e-12;

fn check_nonempty(x: &[usize]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::InvalidArgument("empty label vector".into()));
    }
    Ok(())
}

fn check_pair(x: &[usize], y: &[usize]) -> Result<()> {
    check_nonempty(x)?;
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "label vectors differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    Ok(())
}

fn entropy_of_counts<I: IntoIterator<Item = usize>>(counts: I, n: usize) -> f64 {
    let n = n as f64;
    let h: f64 = counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum();
    // guard against -0.0 and tiny negative rounding residue
    h.max(0.0)
}

/// Plug-in entropy −Σ p ln p of a label vector. Counting uses an ordered
/// map so the summation order, and with it the rounding, is identical on
/// every run.
pub fn entropy(x: &[usize]) -> Result<f64> {
    check_nonempty(x)?;
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &v in x {
        *counts.entry(v).or_insert(0) += 1;
    }
    Ok(entropy_of_counts(counts.into_values(), x.len()))
}

/// Entropy of the paired vector (x_i, y_i).
pub fn joint_entropy(x: &[usize], y: &[usize]) -> Result<f64> {
    check_pair(x, y)?;
    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (&a, &b) in x.iter().zip(y) {
        *counts.entry((a, b)).or_insert(0) += 1;
    }
    Ok(entropy_of_counts(counts.into_values(), x.len()))
}

/// MI(X;Y) = H(X) + H(Y) − H(X,Y), clamped at zero against rounding.
pub fn mutual_information(x: &[usize], y: &[usize]) -> Result<f64> {
    check_pair(x, y)?;
    let mi = entropy(x)? + entropy(y)? - joint_entropy(x, y)?;
    Ok(mi.max(0.0))
}

/// Dense co-occurrence counts of two label vectors. Row/column order is
/// first-appearance order of the respective values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<usize>>,
    pub row_sums: Vec<usize>,
    pub col_sums: Vec<usize>,
    pub n: usize,
}

impl ContingencyTable {
    pub fn from_labels(x: &[usize], y: &[usize]) -> Result<Self> {
        check_pair(x, y)?;
        let mut row_of: HashMap<usize, usize> = HashMap::new();
        let mut col_of: HashMap<usize, usize> = HashMap::new();
        let mut cells: Vec<(usize, usize)> = Vec::with_capacity(x.len());
        for (&a, &b) in x.iter().zip(y) {
            let next = row_of.len();
            let r = *row_of.entry(a).or_insert(next);
            let next = col_of.len();
            let c = *col_of.entry(b).or_insert(next);
            cells.push((r, c));
        }
        let (nr, nc) = (row_of.len(), col_of.len());
        let mut counts = vec![vec![0usize; nc]; nr];
        for (r, c) in cells {
            counts[r][c] += 1;
        }
        let row_sums: Vec<usize> = counts.iter().map(|row| row.iter().sum()).collect();
        let mut col_sums = vec![0usize; nc];
        for row in &counts {
            for (j, &v) in row.iter().enumerate() {
                col_sums[j] += v;
            }
        }
        Ok(ContingencyTable {
            counts,
            row_sums,
            col_sums,
            n: x.len(),
        })
    }
}

/// ln(k!) for k in 0..=n, built by cumulative summation.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut lf = vec![0.0; n + 1];
    for k in 1..=n {
        lf[k] = lf[k - 1] + (k as f64).ln();
    }
    lf
}

/// Expected mutual information of a table under the permutation model
/// (fixed marginals, hypergeometric cell counts).
///
/// Only the first probability of each (a, b) pair is taken through log
/// factorials; the rest follow from the hypergeometric ratio recurrence
/// P(m+1) = P(m) (a−m)(b−m) / ((m+1)(N−a−b+m+1)), which keeps the inner
/// loop free of exp/ln calls. This sits on the selection hot path.
pub fn expected_mi(ct: &ContingencyTable) -> Result<f64> {
    if ct.n == 0 {
        return Err(Error::InvalidArgument("degenerate contingency table (N=0)".into()));
    }
    let n = ct.n;
    let nf = n as f64;
    let lf = ln_factorials(n);
    let mut emi = 0.0;
    for &a in &ct.row_sums {
        for &b in &ct.col_sums {
            let lo = 1.max((a + b).saturating_sub(n));
            let hi = a.min(b);
            // hypergeometric P(lo | N, a, b) via log factorials
            let ln_p = lf[a] + lf[b] + lf[n - a] + lf[n - b]
                - lf[n]
                - lf[lo]
                - lf[a - lo]
                - lf[b - lo]
                - lf[n + lo - a - b];
            let mut p = ln_p.exp();
            let ab = (a * b) as f64;
            for nij in lo..=hi {
                let term = (nij as f64 / nf) * ((nf * nij as f64) / ab).ln();
                emi += term * p;
                p *= ((a - nij) as f64 * (b - nij) as f64)
                    / ((nij + 1) as f64 * (n + nij + 1 - a - b) as f64);
            }
        }
    }
    Ok(emi)
}

/// True when the two vectors group indices identically (same partition,
/// label names ignored).
fn same_partition(x: &[usize], y: &[usize]) -> bool {
    fn canonical(v: &[usize]) -> Vec<usize> {
        let mut first_seen: HashMap<usize, usize> = HashMap::new();
        v.iter()
            .map(|&a| {
                let next = first_seen.len();
                *first_seen.entry(a).or_insert(next)
            })
            .collect()
    }
    canonical(x) == canonical(y)
}

/// Adjusted mutual information:
/// (MI − E[MI]) / (mean(H(X), H(Y)) − E[MI]), arithmetic mean.
///
/// A single contingency pass feeds both entropies, the plug-in MI and
/// E[MI]; recounting the vectors five times over showed up in profiles of
/// the correlation-model build.
///
/// When the denominator vanishes (both vectors constant, say), the value is
/// taken as 1 for identical partitions and 0 otherwise.
pub fn ami(x: &[usize], y: &[usize]) -> Result<f64> {
    check_pair(x, y)?;
    let ct = ContingencyTable::from_labels(x, y)?;
    let nf = ct.n as f64;
    let hx = entropy_of_counts(ct.row_sums.iter().copied(), ct.n);
    let hy = entropy_of_counts(ct.col_sums.iter().copied(), ct.n);
    let mut mi = 0.0;
    for (row, &a) in ct.counts.iter().zip(&ct.row_sums) {
        for (&c, &b) in row.iter().zip(&ct.col_sums) {
            if c > 0 {
                mi += (c as f64 / nf) * ((nf * c as f64) / ((a * b) as f64)).ln();
            }
        }
    }
    let mi = mi.max(0.0);
    let emi = expected_mi(&ct)?;
    let denom = 0.5 * (hx + hy) - emi;
    if denom.abs() < AMI_DENOM_EPS {
        return Ok(if same_partition(x, y) { 1.0 } else { 0.0 });
    }
    Ok((mi - emi) / denom)
}

/// Symmetrical uncertainty 2·MI/(H(X)+H(Y)), zero when either side is
/// constant.
pub fn symmetrical_uncertainty(x: &[usize], y: &[usize]) -> Result<f64> {
    check_pair(x, y)?;
    let hx = entropy(x)?;
    let hy = entropy(y)?;
    if hx + hy < AMI_DENOM_EPS {
        return Ok(0.0);
    }
    Ok(2.0 * mutual_information(x, y)? / (hx + hy))
}

/// Sample Pearson correlation of two real vectors.
pub fn pearson(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::InvalidArgument(format!(
            "vectors differ in length ({} vs {})",
            u.len(),
            v.len()
        )));
    }
    if u.len() < 2 {
        return Err(Error::InvalidArgument(
            "pearson needs at least 2 points".into(),
        ));
    }
    let n = u.len() as f64;
    let mu = u.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<f64>() / n;
    let mut suu = 0.0;
    let mut svv = 0.0;
    let mut suv = 0.0;
    for (&a, &b) in u.iter().zip(v) {
        let (da, db) = (a - mu, b - mv);
        suu += da * da;
        svv += db * db;
        suv += da * db;
    }
    if suu == 0.0 || svv == 0.0 {
        return Err(Error::InvalidArgument(
            "pearson undefined for constant input".into(),
        ));
    }
    Ok(suv / (suu * svv).sqrt())
}
