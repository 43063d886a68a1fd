//! k-means on the columns of a matrix: Lloyd iterations from k-means++
//! seeding with restarts, and an exhaustive solver for tiny instances.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::CommunityAssignment;
use crate::rng::{self, stream, Rng};

pub const DEFAULT_RESTARTS: usize = 25;
pub const DEFAULT_MAX_ITER: usize = 300;

/// Largest `K^n` the exhaustive solver accepts.
pub const EXHAUSTIVE_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: CommunityAssignment,
    /// `dim x K`; column `c` is the center of cluster `c`.
    pub centers: DMatrix<f64>,
    /// Sum of squared distances from each point to its center.
    pub objective: f64,
}

#[inline]
fn sq_dist(points: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>, c: usize) -> f64 {
    points
        .column(i)
        .iter()
        .zip(centers.column(c).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// Nearest center, ties to the lowest index.
fn nearest(points: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>) -> (usize, f64) {
    let mut best = (0, sq_dist(points, i, centers, 0));
    for c in 1..centers.ncols() {
        let d = sq_dist(points, i, centers, c);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

pub fn objective(points: &DMatrix<f64>, labels: &[usize], centers: &DMatrix<f64>) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &c)| sq_dist(points, i, centers, c))
        .sum()
}

fn means(points: &DMatrix<f64>, labels: &[usize], k: usize) -> (DMatrix<f64>, Vec<usize>) {
    let mut centers = DMatrix::zeros(points.nrows(), k);
    let mut counts = vec![0usize; k];
    for (i, &c) in labels.iter().enumerate() {
        counts[c] += 1;
        let mut col = centers.column_mut(c);
        col += points.column(i);
    }
    for (c, &m) in counts.iter().enumerate() {
        if m > 0 {
            centers.column_mut(c).scale_mut(1.0 / m as f64);
        }
    }
    (centers, counts)
}

/// k-means++ seeding.
fn seed_centers(points: &DMatrix<f64>, k: usize, rng: &mut Rng) -> DMatrix<f64> {
    let n = points.ncols();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = (0..n)
        .map(|i| {
            points
                .column(i)
                .iter()
                .zip(points.column(chosen[0]).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum()
        })
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && u < w {
                    pick = i;
                    break;
                }
                u -= w;
            }
            if d2[pick] == 0.0 {
                // rounding pushed u past the end
                pick = d2.iter().rposition(|&w| w > 0.0).unwrap();
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        chosen.push(pick);
        for (i, slot) in d2.iter_mut().enumerate() {
            let d: f64 = points
                .column(i)
                .iter()
                .zip(points.column(pick).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            *slot = slot.min(d);
        }
    }
    DMatrix::from_columns(&chosen.iter().map(|&i| points.column(i).into_owned()).collect::<Vec<DVector<f64>>>())
}

/// Move points into empty clusters until none is empty. Each donor is the
/// non-singleton cluster with the largest inertia; it gives up its
/// farthest point, which becomes the new cluster's center.
fn repair_empty(points: &DMatrix<f64>, labels: &mut [usize], k: usize) -> DMatrix<f64> {
    loop {
        let (mut centers, counts) = means(points, labels, k);
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return centers;
        };
        let mut inertia = vec![0.0; k];
        for (i, &c) in labels.iter().enumerate() {
            inertia[c] += sq_dist(points, i, &centers, c);
        }
        let donor = (0..k)
            .filter(|&c| counts[c] >= 2)
            .max_by(|&a, &b| inertia[a].total_cmp(&inertia[b]).then(b.cmp(&a)))
            .expect("n >= K guarantees a cluster with two points");
        let mut far = None;
        for (i, &c) in labels.iter().enumerate() {
            if c == donor {
                let d = sq_dist(points, i, &centers, donor);
                if far.is_none_or(|(_, best)| d > best) {
                    far = Some((i, d));
                }
            }
        }
        let (i, _) = far.unwrap();
        labels[i] = empty;
        centers.set_column(empty, &points.column(i));
    }
}

/// One Lloyd run. Returns the result and the objective after every center
/// update, which never increases.
pub(crate) fn lloyd(points: &DMatrix<f64>, k: usize, max_iter: usize, rng: &mut Rng) -> (KMeansResult, Vec<f64>) {
    let n = points.ncols();
    let init = seed_centers(points, k, rng);
    let mut labels: Vec<usize> = (0..n).map(|i| nearest(points, i, &init).0).collect();
    let mut trace = Vec::new();
    let mut centers = repair_empty(points, &mut labels, k);
    trace.push(objective(points, &labels, &centers));
    for _ in 0..max_iter {
        let next: Vec<usize> = (0..n).map(|i| nearest(points, i, &centers).0).collect();
        if next == labels {
            break;
        }
        labels = next;
        centers = repair_empty(points, &mut labels, k);
        trace.push(objective(points, &labels, &centers));
    }
    let objective = *trace.last().unwrap();
    (
        KMeansResult {
            labels: CommunityAssignment(labels),
            centers,
            objective,
        },
        trace,
    )
}

/// Best of `restarts` Lloyd runs by objective; ties go to the earliest run.
pub fn kmeans(points: &DMatrix<f64>, k: usize, restarts: usize, seed: u64) -> KMeansResult {
    kmeans_with(points, k, restarts, DEFAULT_MAX_ITER, seed)
}

pub fn kmeans_with(points: &DMatrix<f64>, k: usize, restarts: usize, max_iter: usize, seed: u64) -> KMeansResult {
    assert!(k >= 1 && points.ncols() >= k, "k-means needs n >= K >= 1");
    let runs: Vec<KMeansResult> = (0..restarts.max(1) as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::indexed_rng(seed, stream::KMEANS, r);
            lloyd(points, k, max_iter, &mut rng).0
        })
        .collect();
    runs.into_iter()
        .reduce(|best, run| if run.objective < best.objective { run } else { best })
        .unwrap()
}

/// Global k-means optimum by enumerating all `K^n` assignments. The first
/// assignment in lexicographic order attaining the minimum wins.
pub fn kmeans_exhaustive(points: &DMatrix<f64>, k: usize) -> Result<KMeansResult> {
    let n = points.ncols();
    let total = (k as u64)
        .checked_pow(n as u32)
        .filter(|&t| t <= EXHAUSTIVE_LIMIT)
        .ok_or_else(|| Error::InstanceTooLarge(format!("{k}^{n} assignments exceed {EXHAUSTIVE_LIMIT}")))?;
    let mut labels = vec![0usize; n];
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..total {
        let (centers, _) = means(points, &labels, k);
        let obj = objective(points, &labels, &centers);
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, labels.clone()));
        }
        // odometer increment, last position fastest
        for pos in (0..n).rev() {
            labels[pos] += 1;
            if labels[pos] < k {
                break;
            }
            labels[pos] = 0;
        }
    }
    let (objective, labels) = best.expect("at least one assignment");
    let (centers, _) = means(points, &labels, k);
    Ok(KMeansResult {
        labels: CommunityAssignment(labels),
        centers,
        objective,
    })
}

/// True if the two labelings induce the same partition.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    use std::collections::HashMap;
    if a.len() != b.len() {
        return false;
    }
    let mut fwd = HashMap::new();
    let mut bwd = HashMap::new();
    a.iter().zip(b).all(|(&x, &y)| *fwd.entry(x).or_insert(y) == y && *bwd.entry(y).or_insert(x) == x)
}
