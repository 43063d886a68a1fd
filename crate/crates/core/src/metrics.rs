//! Misclassification count up to relabeling of the estimate.

use pathfinding::prelude::{kuhn_munkres, Matrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::CommunityAssignment;

/// Largest `K` solved by the exact subset dynamic program; above this the
/// Hungarian solver is used.
pub const SUBSET_DP_MAX_K: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisclassificationResult {
    pub count: usize,
    pub rate: f64,
    /// `best_perm[b]` is the true community matched to estimated label `b`.
    pub best_perm: Vec<usize>,
    /// `confusion[a][b]` counts nodes with truth `a` and estimate `b`.
    pub confusion: Vec<Vec<usize>>,
}

fn check_labels(sigma: &CommunityAssignment, k: usize) -> Result<()> {
    match sigma.labels().iter().position(|&c| c >= k) {
        Some(index) => Err(Error::LabelOutOfRange {
            index,
            label: sigma.labels()[index] + 1,
            max: k,
        }),
        None => Ok(()),
    }
}

pub fn confusion_matrix(truth: &CommunityAssignment, est: &CommunityAssignment, k: usize) -> Result<Vec<Vec<usize>>> {
    if truth.len() != est.len() {
        return Err(Error::DimensionMismatch {
            what: "estimated assignment length",
            expected: truth.len(),
            found: est.len(),
        });
    }
    check_labels(truth, k)?;
    check_labels(est, k)?;
    let mut conf = vec![vec![0usize; k]; k];
    for (&a, &b) in truth.labels().iter().zip(est.labels()) {
        conf[a][b] += 1;
    }
    Ok(conf)
}

/// Maximum matched mass with the lexicographically smallest witness.
///
/// `best[mask]` is the largest mass obtainable by matching estimated labels
/// `popcount(mask)..K` to the truth labels outside `mask`.
fn subset_dp(conf: &[Vec<usize>]) -> Vec<usize> {
    let k = conf.len();
    let full = (1usize << k) - 1;
    let mut best = vec![0usize; 1 << k];
    for mask in (0..full).rev() {
        let b = mask.count_ones() as usize;
        best[mask] = (0..k)
            .filter(|a| mask & (1 << a) == 0)
            .map(|a| conf[a][b] + best[mask | (1 << a)])
            .max()
            .unwrap_or(0);
    }
    let mut perm = Vec::with_capacity(k);
    let mut mask = 0usize;
    for b in 0..k {
        let a = (0..k)
            .find(|&a| mask & (1 << a) == 0 && conf[a][b] + best[mask | (1 << a)] == best[mask])
            .expect("an optimal extension exists");
        perm.push(a);
        mask |= 1 << a;
    }
    perm
}

fn hungarian(conf: &[Vec<usize>]) -> Vec<usize> {
    let k = conf.len();
    // rows are estimated labels, columns truth labels
    let weights = Matrix::from_fn(k, k, |(b, a)| conf[a][b] as i64);
    kuhn_munkres(&weights).1
}

pub fn misclassified_count(truth: &CommunityAssignment, est: &CommunityAssignment, k: usize) -> Result<MisclassificationResult> {
    let confusion = confusion_matrix(truth, est, k)?;
    let best_perm = if k <= SUBSET_DP_MAX_K {
        subset_dp(&confusion)
    } else {
        hungarian(&confusion)
    };
    let matched: usize = best_perm.iter().enumerate().map(|(b, &a)| confusion[a][b]).sum();
    let n = truth.len();
    let count = n - matched;
    Ok(MisclassificationResult {
        count,
        rate: if n == 0 { 0.0 } else { count as f64 / n as f64 },
        best_perm,
        confusion,
    })
}
