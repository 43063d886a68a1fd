#![allow(dead_code)]

use clsbm::{CommunityAssignment, ModelParams};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Two balanced communities, one edge label with within/between
/// probabilities `a`/`b`, and 2-d means `(+m, 0)` and `(-m, 0)`.
pub fn two_block(n: usize, a: f64, b: f64, m: f64) -> ModelParams {
    ModelParams {
        n,
        k: 2,
        l: 1,
        d: 2,
        alpha: vec![0.5, 0.5],
        p: vec![
            vec![vec![1.0 - a, 1.0 - b], vec![1.0 - b, 1.0 - a]],
            vec![vec![a, b], vec![b, a]],
        ],
        mu: vec![vec![m, 0.0], vec![-m, 0.0]],
    }
    .validate()
    .unwrap()
}

/// The strong-signal setting: within 0.5, between 0.05, `||mu_1 - mu_2|| = 4`.
pub fn strong_signal(n: usize) -> ModelParams {
    two_block(n, 0.5, 0.05, 2.0)
}

/// Random symmetric label laws with every nonzero label below `pmax`.
pub fn random_params(r: &mut ChaCha8Rng, n: usize, k: usize, l: usize, d: usize, pmax: f64, mu_scale: f64) -> ModelParams {
    let mut alpha: Vec<f64> = (0..k).map(|_| r.random_range(0.5..1.5)).collect();
    let total: f64 = alpha.iter().sum();
    alpha.iter_mut().for_each(|a| *a /= total);
    let mut p = vec![vec![vec![0.0; k]; k]; l + 1];
    for i in 0..k {
        for j in i..k {
            let mut rest = 1.0;
            for slice in p.iter_mut().skip(1) {
                let v = r.random_range(0.05..1.0) * pmax / l as f64;
                slice[i][j] = v;
                slice[j][i] = v;
                rest -= v;
            }
            p[0][i][j] = rest;
            p[0][j][i] = rest;
        }
    }
    let mu = (0..k)
        .map(|_| (0..d).map(|_| mu_scale * r.random_range(-1.0..1.0)).collect())
        .collect();
    ModelParams { n, k, l, d, alpha, p, mu }.validate().unwrap()
}

/// Apply a community relabeling: new community `perm[c]` takes the role of old `c`.
pub fn relabel(params: &ModelParams, perm: &[usize]) -> ModelParams {
    let k = params.k;
    let mut out = params.clone();
    for c in 0..k {
        out.alpha[perm[c]] = params.alpha[c];
        out.mu[perm[c]] = params.mu[c].clone();
        for l in 0..=params.l {
            for c2 in 0..k {
                out.p[l][perm[c]][perm[c2]] = params.p[l][c][c2];
            }
        }
    }
    out
}

pub fn random_perm(r: &mut ChaCha8Rng, k: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..k).collect();
    v.shuffle(r);
    v
}

pub fn all_perms(k: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                prefix.push(c);
                go(prefix, used, out);
                prefix.pop();
                used[c] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// Minimum over all relabelings `pi` of `#{i : pi(est_i) != truth_i}`.
pub fn brute_force_misclassified(truth: &CommunityAssignment, est: &CommunityAssignment, k: usize) -> usize {
    all_perms(k)
        .iter()
        .map(|pi| {
            truth
                .labels()
                .iter()
                .zip(est.labels())
                .filter(|(&t, &e)| pi[e] != t)
                .count()
        })
        .min()
        .unwrap()
}

pub fn random_symmetric(r: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| r.random_range(-1.0..1.0));
    (&a + a.transpose()) * 0.5
}

/// Spearman rank correlation, with tied values sharing their average rank.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0;
            for &t in &idx[i..=j] {
                r[t] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
