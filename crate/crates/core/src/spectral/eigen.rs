//! Symmetric eigensolvers.
//!
//! Small matrices go through cyclic Jacobi, which resolves the full spectrum
//! to machine precision. Larger ones use Lanczos with full
//! reorthogonalization, growing the Krylov space until the wanted Ritz pairs
//! have converged. Both return eigenpairs ordered by decreasing magnitude.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::{self, stream};

/// Matrices up to this order are decomposed with Jacobi.
pub const JACOBI_MAX_N: usize = 64;

/// Off-diagonal mass, relative to the Frobenius norm, at which Jacobi stops.
const JACOBI_TOL: f64 = 1e-15;

const LANCZOS_TOL: f64 = 1e-12;

/// Full eigendecomposition by cyclic Jacobi. Columns of the returned matrix
/// are the eigenvectors, in the same (unsorted) order as the values.
pub fn jacobi_eigen(s: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = s.nrows();
    // row-major working copy; symmetric so either layout reads the same
    let mut a: Vec<f64> = (0..n * n).map(|idx| s[(idx / n, idx % n)]).collect();
    let mut vt = vec![0.0; n * n];
    for i in 0..n {
        vt[i * n + i] = 1.0;
    }
    let frob2: f64 = a.iter().map(|x| x * x).sum();
    let max_rotations = 10 * n * n;
    let mut rotations = 0usize;

    let off2 = |a: &[f64]| -> f64 {
        let mut acc = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                acc += 2.0 * a[p * n + q] * a[p * n + q];
            }
        }
        acc
    };

    loop {
        let off = off2(&a);
        if off <= JACOBI_TOL * JACOBI_TOL * frob2 || off == 0.0 {
            break;
        }
        if rotations >= max_rotations {
            return Err(Error::EigenConvergence {
                iterations: rotations,
                residual: (off / frob2).sqrt(),
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                if apq.abs() <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()).max(f64::MIN_POSITIVE) {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                rotations += 1;
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                // rows p and q are contiguous; the matching columns follow by symmetry
                for r in 0..n {
                    let apr = a[p * n + r];
                    let aqr = a[q * n + r];
                    a[p * n + r] = c * apr - sn * aqr;
                    a[q * n + r] = sn * apr + c * aqr;
                }
                for r in 0..n {
                    a[r * n + p] = a[p * n + r];
                    a[r * n + q] = a[q * n + r];
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                // vt holds eigenvectors as rows
                for r in 0..n {
                    let vp = vt[p * n + r];
                    let vq = vt[q * n + r];
                    vt[p * n + r] = c * vp - sn * vq;
                    vt[q * n + r] = sn * vp + c * vq;
                }
            }
        }
    }
    let values = (0..n).map(|i| a[i * n + i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| vt[c * n + r]);
    Ok((values, vectors))
}

/// Indices of the `k` largest-magnitude values; ties go to the larger
/// algebraic value, then the lower index.
pub(crate) fn top_k_by_magnitude(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[b]
            .abs()
            .total_cmp(&values[a].abs())
            .then(values[b].total_cmp(&values[a]))
            .then(a.cmp(&b))
    });
    idx.truncate(k);
    idx
}

/// Flip the vector so its largest-magnitude coordinate is positive.
pub(crate) fn fix_sign(mut v: DVector<f64>) -> DVector<f64> {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if !v.is_empty() && v[best] < 0.0 {
        v.neg_mut();
    }
    v
}

/// Top-`k` eigenpairs by magnitude via Jacobi.
pub fn jacobi_top_k(s: &DMatrix<f64>, k: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let (values, vectors) = jacobi_eigen(s)?;
    let idx = top_k_by_magnitude(&values, k);
    let vals = idx.iter().map(|&i| values[i]).collect();
    let vecs = DMatrix::from_columns(&idx.iter().map(|&i| vectors.column(i).into_owned()).collect::<Vec<_>>());
    Ok((vals, vecs))
}

fn orthogonalize(w: &mut DVector<f64>, basis: &[DVector<f64>]) {
    // classical Gram-Schmidt applied twice
    for _ in 0..2 {
        for q in basis {
            let c = q.dot(w);
            w.axpy(-c, q, 1.0);
        }
    }
}

/// Top-`k` eigenpairs by magnitude via Lanczos with full reorthogonalization.
pub fn lanczos_top_k(s: &DMatrix<f64>, k: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = s.nrows();
    let scale = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Ok((vec![0.0; k], DMatrix::identity(n, k)));
    }
    let mut rng = rng::stream_rng(n as u64, stream::LANCZOS);
    let mut random_unit = |basis: &[DVector<f64>]| -> Option<DVector<f64>> {
        for _ in 0..8 {
            let mut w = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            orthogonalize(&mut w, basis);
            let norm = w.norm();
            if norm > 1e-8 {
                return Some(w / norm);
            }
        }
        None
    };

    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut next = random_unit(&basis).expect("nonempty space");
    let mut target = n.min((2 * k + 30).max(50));
    let mut last_residual = f64::INFINITY;
    let mut stalled = false;

    loop {
        while basis.len() < target {
            let q = next.clone();
            let mut w = s * &q;
            if let (Some(prev), Some(&b)) = (basis.last(), betas.last()) {
                w.axpy(-b, prev, 1.0);
            }
            let alpha = q.dot(&w);
            w.axpy(-alpha, &q, 1.0);
            basis.push(q);
            orthogonalize(&mut w, &basis);
            let beta = w.norm();
            alphas.push(alpha);
            if basis.len() == n {
                betas.push(0.0);
                break;
            }
            if beta <= 1e-10 * scale {
                // invariant subspace reached; continue from a fresh direction
                betas.push(0.0);
                match random_unit(&basis) {
                    Some(r) => next = r,
                    None => {
                        stalled = true;
                        break;
                    }
                }
            } else {
                betas.push(beta);
                next = w / beta;
            }
        }
        let m = basis.len();
        let t = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alphas[i]
            } else if i + 1 == j {
                betas[i]
            } else if j + 1 == i {
                betas[j]
            } else {
                0.0
            }
        });
        let eig = nalgebra::SymmetricEigen::new(t);
        let theta: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let y = eig.eigenvectors;
        let idx = top_k_by_magnitude(&theta, k.min(m));
        let norm_est = theta.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let tail = betas[m - 1];
        let residual = idx
            .iter()
            .map(|&i| (tail * y[(m - 1, i)]).abs())
            .fold(0.0, f64::max);
        last_residual = last_residual.min(residual / norm_est.max(f64::MIN_POSITIVE));
        let exhausted = m >= n || stalled;
        if (residual <= LANCZOS_TOL * norm_est && idx.len() == k) || exhausted {
            let q = DMatrix::from_columns(&basis);
            let vals = idx.iter().map(|&i| theta[i]).collect();
            let vecs = DMatrix::from_columns(
                &idx.iter()
                    .map(|&i| {
                        let v = &q * y.column(i);
                        let norm = v.norm();
                        v / norm
                    })
                    .collect::<Vec<_>>(),
            );
            return Ok((vals, vecs));
        }
        if target >= n {
            return Err(Error::EigenConvergence {
                iterations: m,
                residual: last_residual,
            });
        }
        target = n.min(target + target / 2);
    }
}
