//! Stratified cross-validation fold assignment.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    /// fold id per training instance
    pub fold_of: Vec<usize>,
    pub k: usize,
    pub seed: u64,
}

/// The fold count actually usable for these labels: stratification caps k
/// at the smallest class size.
pub fn effective_fold_count(labels: &[usize], requested_k: usize) -> usize {
    let mut counts: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0) += 1;
    }
    counts
        .into_values()
        .min()
        .map_or(requested_k, |smallest| requested_k.min(smallest))
}

/// Stratified fold assignment: a seeded shuffle within each class, then a
/// single round-robin counter running across classes in ascending class-id
/// order. The shared counter keeps every fold non-empty and within-class
/// fold sizes within one of each other.
pub fn make_folds(labels: &[usize], k: usize, seed: u64) -> Result<FoldAssignment> {
    if labels.is_empty() {
        return Err(Error::InvalidArgument("no instances to fold".into()));
    }
    if k < 2 {
        return Err(Error::InvalidArgument(format!("fold count {k} below 2")));
    }
    if k > labels.len() {
        return Err(Error::InvalidArgument(format!(
            "fold count {k} exceeds {} instances",
            labels.len()
        )));
    }
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; labels.len()];
    let mut counter = 0usize;
    for class in classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            fold_of[i] = counter % k;
            counter += 1;
        }
    }
    Ok(FoldAssignment {
        fold_of,
        k,
        seed,
    })
}
