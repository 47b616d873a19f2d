//! Stratified, seeded index partitioning shared by the tuner and the
//! evaluation harness.

use alloc::vec::Vec;

use crate::epochs::{Label, LABEL_CLASS1, LABEL_CLASS2};
use crate::rng::CounterRng;

#[derive(Debug, Clone, PartialEq)]
pub enum SplitError {
    ClassSmallerThanFolds { label: Label, count: usize, folds: usize },
    InfeasibleFraction { label: Label, train: usize, test: usize },
    BadFoldCount { folds: usize },
}

impl core::fmt::Display for SplitError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SplitError::ClassSmallerThanFolds { label, count, folds } => {
                write!(f, "class {label} has {count} trials, fewer than {folds} folds")
            }
            SplitError::InfeasibleFraction { label, train, test } => write!(
                f,
                "fraction leaves class {label} with {train} training / {test} test trials"
            ),
            SplitError::BadFoldCount { folds } => write!(f, "fold count must be >= 2, got {folds}"),
        }
    }
}

impl core::error::Error for SplitError {}

fn class_indices(labels: &[Label], label: Label) -> Vec<usize> {
    labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == label)
        .map(|(i, _)| i)
        .collect()
}

/// Stratified k-fold partition: returns the test indices of each fold.
///
/// Each class is shuffled with its own derived stream and dealt round-robin,
/// so per-fold class counts differ from proportionality by at most one and
/// every trial lands in exactly one fold.
pub fn stratified_kfold(
    labels: &[Label],
    folds: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>, SplitError> {
    if folds < 2 {
        return Err(SplitError::BadFoldCount { folds });
    }
    let mut out: Vec<Vec<usize>> = (0..folds).map(|_| Vec::new()).collect();
    for (stream, label) in [LABEL_CLASS1, LABEL_CLASS2].into_iter().enumerate() {
        let mut idx = class_indices(labels, label);
        if idx.len() < folds {
            return Err(SplitError::ClassSmallerThanFolds {
                label,
                count: idx.len(),
                folds,
            });
        }
        CounterRng::stream(seed, stream as u64).shuffle(&mut idx);
        for (i, trial) in idx.into_iter().enumerate() {
            out[i % folds].push(trial);
        }
    }
    for fold in &mut out {
        fold.sort_unstable();
    }
    Ok(out)
}

/// Stratified random draw of `fraction` of the trials as a training set;
/// the remainder is the test set. Per-class training counts are
/// `round(fraction · class count)`.
pub fn stratified_draw(
    labels: &[Label],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), SplitError> {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (stream, label) in [LABEL_CLASS1, LABEL_CLASS2].into_iter().enumerate() {
        let mut idx = class_indices(labels, label);
        let n_train = libm::round(fraction * idx.len() as f64) as usize;
        let n_test = idx.len() - n_train.min(idx.len());
        if n_train < 2 || n_test == 0 {
            return Err(SplitError::InfeasibleFraction {
                label,
                train: n_train,
                test: n_test,
            });
        }
        CounterRng::stream(seed, stream as u64).shuffle(&mut idx);
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}
