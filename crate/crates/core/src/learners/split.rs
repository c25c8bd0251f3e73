//! Stratified holdout followed by a stratified k-fold deal of the remainder.

use crate::rng::{derive_seed, rng_from_seed};
use rand::seq::SliceRandom;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SplitError {
    #[error("class {class} has {have} members, need at least {need}")]
    TooFewSamples { class: u8, have: usize, need: usize },
}

/// Split indices into a stratified holdout test set plus k stratified CV
/// folds over the remainder.
///
/// Per class: indices are shuffled with a seed derived from (seed, class),
/// the first round(test_frac · n_class) go to the test set, and the rest
/// are dealt round-robin into the k folds. The test set and folds partition
/// 0..y.len(); folds are pairwise disjoint and balanced within each class
/// to within one member.
pub fn stratified_holdout_then_kfold(
    y: &[u8],
    test_frac: f64,
    k: usize,
    seed: u64,
) -> Result<(Vec<usize>, Vec<Vec<usize>>), SplitError> {
    assert!(k >= 1);
    assert!((0.0..1.0).contains(&test_frac));
    let mut test = Vec::new();
    let mut folds = vec![Vec::new(); k];

    for class in [0u8, 1u8] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        // Round half away from zero, matching the rest of the crate.
        let n_test = (test_frac * idx.len() as f64).round() as usize;
        if idx.len() < k + n_test {
            return Err(SplitError::TooFewSamples {
                class,
                have: idx.len(),
                need: k + n_test,
            });
        }
        let mut rng = rng_from_seed(derive_seed(seed, u64::from(class)));
        idx.shuffle(&mut rng);
        test.extend_from_slice(&idx[..n_test]);
        for (j, &i) in idx[n_test..].iter().enumerate() {
            folds[j % k].push(i);
        }
    }

    test.sort_unstable();
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok((test, folds))
}
