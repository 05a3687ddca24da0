//! Seeded k-fold partitions.

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{PipelineError, Result};
use crate::seed::rng_for;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn deal(order: &[usize], n: usize, k: usize) -> Vec<Fold> {
    let mut assign = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        assign[i] = pos % k;
    }
    (0..k)
        .map(|f| Fold {
            train: (0..n).filter(|&i| assign[i] != f).collect(),
            test: (0..n).filter(|&i| assign[i] == f).collect(),
        })
        .collect()
}

fn check(n: usize, k: usize) -> Result<()> {
    if k < 2 || n < k {
        return Err(PipelineError::Config(format!("cannot split {n} instances into {k} folds")));
    }
    Ok(())
}

/// Shuffles `0..n` and deals positions round-robin, so fold sizes differ by at most one.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Fold>> {
    check(n, k)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_for(seed, "folds"));
    Ok(deal(&order, n, k))
}

/// Like [`kfold_split`] but deals each label's instances in turn, so every fold
/// sees each class in proportion.
pub fn stratified_kfold_split(labels: &[usize], k: usize, seed: u64) -> Result<Vec<Fold>> {
    let n = labels.len();
    check(n, k)?;
    let mut rng = rng_for(seed, "folds");
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let mut order = Vec::with_capacity(n);
    for c in classes {
        let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        members.shuffle(&mut rng);
        order.extend(members);
    }
    Ok(deal(&order, n, k))
}
