//! Stratified fold assignment.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::dataset::Dataset;
use crate::rng::{self, tag};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    /// Fold index of every row.
    pub fold_of: Vec<usize>,
    pub folds: usize,
    pub requested: usize,
    /// Set when `folds < requested`.
    pub warning: Option<String>,
}

impl FoldAssignment {
    /// Training and test row indices of fold `f`, both in row order.
    pub fn split(&self, f: usize) -> (Vec<usize>, Vec<usize>) {
        let (test, train): (Vec<usize>, Vec<usize>) = (0..self.fold_of.len()).partition(|&r| self.fold_of[r] == f);
        (train, test)
    }
}

/// Shuffle each class with its own stream `(seed, FOLDS, class)` and deal
/// the rows out round-robin, continuing the deal across classes, so every
/// fold gets an almost equal share of every class.
///
/// When the smallest class has fewer than `folds` rows the fold count drops
/// to that size (never below 2) and a warning is recorded.
pub fn stratified_folds(d: &Dataset, folds: usize, seed: u64) -> Result<FoldAssignment> {
    if folds < 2 {
        return Err(Error::InvalidParameter("folds must be >= 2".into()));
    }
    if d.n_rows() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            found: d.n_rows(),
        });
    }
    let counts = d.class_counts();
    let smallest = counts.iter().copied().filter(|&c| c > 0).min().unwrap_or(0);
    let mut k = folds.min(d.n_rows());
    let mut warning = None;
    if smallest < k {
        k = smallest.max(2);
    }
    if k < folds {
        warning = Some(format!(
            "reduced folds from {folds} to {k}: smallest class has {smallest} rows"
        ));
    }
    let mut fold_of = vec![0; d.n_rows()];
    let mut next = 0;
    for class in 0..d.n_classes() {
        let mut rows: Vec<usize> = (0..d.n_rows()).filter(|&r| d.label(r) as usize == class).collect();
        let mut rng = rng::stream(seed, &[tag::FOLDS, class as u64]);
        rows.shuffle(&mut rng);
        for r in rows {
            fold_of[r] = next % k;
            next += 1;
        }
    }
    Ok(FoldAssignment {
        fold_of,
        folds: k,
        requested: folds,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn stratified_and_deterministic() {
        let d = synth::random_mixed(103, 4, 1);
        let a = stratified_folds(&d, 10, 5).unwrap();
        assert_eq!(a, stratified_folds(&d, 10, 5).unwrap());
        assert_eq!(a.folds, 10);
        assert!(a.warning.is_none());
        for class in 0..d.n_classes() as u32 {
            let mut per = [0usize; 10];
            for r in 0..d.n_rows() {
                if d.label(r) == class {
                    per[a.fold_of[r]] += 1;
                }
            }
            let (lo, hi) = (per.iter().min().unwrap(), per.iter().max().unwrap());
            assert!(hi - lo <= 1);
        }
        let (train, test) = a.split(3);
        assert_eq!(train.len() + test.len(), d.n_rows());
    }

    #[test]
    fn reduces_with_warning() {
        let d = synth::separable(8, 1, 0, 0);
        let a = stratified_folds(&d, 10, 0).unwrap();
        assert_eq!(a.folds, 4);
        assert!(a.warning.unwrap().contains("10 to 4"));
        assert!(stratified_folds(&d, 1, 0).is_err());
    }
}
