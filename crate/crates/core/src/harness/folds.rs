use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratifiedFolds {
    pub folds: Vec<Fold>,
    /// Classes with a single instance; that instance stays in every
    /// training split and is never tested.
    pub training_only: Vec<usize>,
}

/// Stratified k-fold split. Each class is shuffled and dealt round-robin,
/// continuing the deal where the previous class stopped, so per-class
/// counts across folds differ by at most one and so do fold sizes.
pub fn stratified_folds(labels: &[usize], folds: usize, seed: u64) -> Result<StratifiedFolds> {
    let n = labels.len();
    if folds < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {folds}")));
    }
    if folds > n {
        return Err(Error::invalid(format!("{folds} folds for {n} instances")));
    }
    let c = labels.iter().max().map_or(0, |&m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); c];
    for (i, &y) in labels.iter().enumerate() {
        members[y].push(i);
    }
    let mut rng = rng_from_seed(seed);
    let mut assigned: Vec<Option<usize>> = vec![None; n];
    let mut training_only = Vec::new();
    let mut offset = 0;
    for (j, class) in members.iter_mut().enumerate() {
        for i in (1..class.len()).rev() {
            class.swap(i, rng.random_range(0..=i));
        }
        if class.len() == 1 {
            training_only.push(j);
            continue;
        }
        for (t, &i) in class.iter().enumerate() {
            assigned[i] = Some((offset + t) % folds);
        }
        offset += class.len();
    }
    let folds = (0..folds)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..n).partition(|&i| assigned[i] == Some(f));
            Fold { train, test }
        })
        .collect();
    Ok(StratifiedFolds {
        folds,
        training_only,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn balanced_two_class_five_folds() {
        let y = vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1];
        let s = stratified_folds(&y, 5, 1).unwrap();
        for f in &s.folds {
            let mut t: Vec<usize> = f.test.iter().map(|&i| y[i]).collect();
            t.sort_unstable();
            assert_eq!(t, vec![0, 1]);
            assert_eq!(f.train.len(), 8);
        }
    }

    #[test]
    fn folds_equal_n_is_leave_one_out() {
        let y = vec![0, 0, 0, 1, 1, 1];
        let s = stratified_folds(&y, 6, 5).unwrap();
        let mut tested: Vec<usize> = s.folds.iter().map(|f| {
            assert_eq!(f.test.len(), 1);
            f.test[0]
        }).collect();
        tested.sort_unstable();
        assert_eq!(tested, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let y: Vec<usize> = (0..40).map(|i| i % 3).collect();
        assert_eq!(stratified_folds(&y, 4, 9).unwrap(), stratified_folds(&y, 4, 9).unwrap());
        assert_ne!(stratified_folds(&y, 4, 9).unwrap(), stratified_folds(&y, 4, 10).unwrap());
    }

    #[test]
    fn singleton_class_stays_in_training() {
        let y = vec![0, 0, 0, 0, 1, 1, 1, 1, 2];
        let s = stratified_folds(&y, 3, 0).unwrap();
        assert_eq!(s.training_only, vec![2]);
        assert!(s.folds.iter().all(|f| f.train.contains(&8) && !f.test.contains(&8)));
    }

    #[test]
    fn rejects_bad_fold_counts() {
        assert!(stratified_folds(&[0, 1], 1, 0).is_err());
        assert!(stratified_folds(&[0, 1], 3, 0).is_err());
    }

    proptest! {
        #[test]
        fn partition_and_balance(
            labels in prop::collection::vec(0usize..4, 8..80),
            folds in 2usize..8,
            seed in any::<u64>(),
        ) {
            prop_assume!(folds <= labels.len());
            let s = stratified_folds(&labels, folds, seed).unwrap();
            let c = labels.iter().max().unwrap() + 1;
            let mut seen = vec![0usize; labels.len()];
            for f in &s.folds {
                for &i in &f.test { seen[i] += 1; }
                prop_assert_eq!(f.train.len() + f.test.len(), labels.len());
                prop_assert!(f.test.iter().all(|i| !f.train.contains(i)));
            }
            for (i, &k) in seen.iter().enumerate() {
                let single = s.training_only.contains(&labels[i]);
                prop_assert_eq!(k, usize::from(!single));
            }
            for j in 0..c {
                let per: Vec<usize> = s.folds.iter().map(|f| f.test.iter().filter(|&&i| labels[i] == j).count()).collect();
                prop_assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1);
            }
            let sizes: Vec<usize> = s.folds.iter().map(|f| f.test.len()).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }
    }
}
