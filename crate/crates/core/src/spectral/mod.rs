//! Spectral community detection.
//!
//! The pipeline builds the aggregated matrix `S`, takes its top-`K`
//! eigenvectors `U` (by eigenvalue magnitude, so that `U diag(lambda) U^T`
//! is the best rank-`K` approximation of `S`), projects to `Q = U^T S` and
//! runs k-means on the columns of `Q`. Because `U` has orthonormal columns,
//! distances between columns of `Q` equal distances between columns of the
//! rank-`K` approximation, so both clusterings coincide.

mod eigen;
pub mod kmeans;

use nalgebra::{DMatrix, DVector};

use crate::aggregate::{build_S, sample_weights, AggregatedMatrix, LabelWeights};
use crate::error::{Error, Result};
use crate::model::CommunityAssignment;
use crate::rng::{self, stream};
use crate::sampler::{AttributeMatrix, LabeledGraph};

pub use eigen::{jacobi_eigen, jacobi_top_k, lanczos_top_k, JACOBI_MAX_N};
pub use kmeans::{kmeans, kmeans_exhaustive, same_partition, KMeansResult, DEFAULT_MAX_ITER, DEFAULT_RESTARTS};

/// Selected eigenpairs; `vectors` is `n x K` with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenBasis {
    /// Largest `||S v - lambda v||_2` over the selected pairs.
    pub fn max_residual(&self, s: &DMatrix<f64>) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &lambda)| {
                let v = self.vectors.column(i);
                (s * v - v * lambda).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// The `k` eigenpairs of largest `|lambda|`, ordered by decreasing magnitude.
/// Each vector's largest-magnitude coordinate is positive.
pub fn top_k_eigen(s: &DMatrix<f64>, k: usize) -> Result<EigenBasis> {
    let n = s.nrows();
    if s.ncols() != n {
        return Err(Error::DimensionMismatch {
            what: "square matrix columns",
            expected: n,
            found: s.ncols(),
        });
    }
    if k == 0 || k > n {
        return Err(Error::Config(format!("need 1 <= K <= n, got K = {k}, n = {n}")));
    }
    let (values, vectors) = if n <= JACOBI_MAX_N {
        jacobi_top_k(s, k)?
    } else {
        lanczos_top_k(s, k)?
    };
    let vectors = DMatrix::from_columns(
        &vectors
            .column_iter()
            .map(|c| eigen::fix_sign(c.into_owned()))
            .collect::<Vec<DVector<f64>>>(),
    );
    let basis = EigenBasis { values, vectors };
    let opnorm = basis.values.first().map_or(0.0, |v| v.abs());
    let residual = basis.max_residual(s);
    if residual > 1e-8 * opnorm {
        return Err(Error::EigenConvergence {
            iterations: 0,
            residual: residual / opnorm.max(f64::MIN_POSITIVE),
        });
    }
    Ok(basis)
}

/// `Q = U^T S`, a `K x n` matrix.
pub fn project(basis: &EigenBasis, s: &DMatrix<f64>) -> DMatrix<f64> {
    basis.vectors.tr_mul(s)
}

/// `sum_i lambda_i v_i v_i^T` over the top-`k` pairs by magnitude.
pub fn best_rank_k(s: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    let basis = top_k_eigen(s, k)?;
    Ok(rank_k_from(&basis))
}

pub fn rank_k_from(basis: &EigenBasis) -> DMatrix<f64> {
    let u = &basis.vectors;
    let scaled = DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] * basis.values[j]);
    scaled * u.transpose()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectOptions {
    pub seed: u64,
    pub restarts: usize,
    pub max_iter: usize,
    /// Fixed label weights; drawn Uniform[0, 1] from `seed` when absent.
    pub weights: Option<LabelWeights>,
    /// Number of nonzero labels `L`; defaults to the largest label in the graph.
    pub num_labels: Option<usize>,
}

impl Default for DetectOptions {
    fn default() -> Self {
        DetectOptions {
            seed: 0,
            restarts: DEFAULT_RESTARTS,
            max_iter: DEFAULT_MAX_ITER,
            weights: None,
            num_labels: None,
        }
    }
}

impl DetectOptions {
    pub fn with_seed(seed: u64) -> Self {
        DetectOptions {
            seed,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct Detection {
    pub assignment: CommunityAssignment,
    pub aggregated: AggregatedMatrix,
    pub basis: EigenBasis,
    pub kmeans: KMeansResult,
}

/// Spectral community detection with all intermediate results.
pub fn detect_full(
    graph: &LabeledGraph,
    attrs: &AttributeMatrix,
    k: usize,
    options: &DetectOptions,
) -> Result<Detection> {
    let weights = match &options.weights {
        Some(w) => w.clone(),
        None => {
            let l = options.num_labels.unwrap_or(graph.max_label() as usize);
            sample_weights(l, rng::derive(options.seed, stream::DETECT, 0))
        }
    };
    let aggregated = build_S(graph, attrs, &weights)?;
    let basis = top_k_eigen(&aggregated.s, k)?;
    let q = project(&basis, &aggregated.s);
    let km = kmeans::kmeans_with(
        &q,
        k,
        options.restarts,
        options.max_iter,
        rng::derive(options.seed, stream::DETECT, 1),
    );
    Ok(Detection {
        assignment: km.labels.clone(),
        aggregated,
        basis,
        kmeans: km,
    })
}

pub fn detect(
    graph: &LabeledGraph,
    attrs: &AttributeMatrix,
    k: usize,
    options: &DetectOptions,
) -> Result<CommunityAssignment> {
    detect_full(graph, attrs, k, options).map(|d| d.assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn diagonal_matrix_top_two() {
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 1.0]));
        let b = top_k_eigen(&s, 2).unwrap();
        assert_eq!(b.values, vec![3.0, 2.0]);
        assert_eq!(b.vectors, DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn selection_is_by_magnitude() {
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![-5.0, 1.0]));
        let b = top_k_eigen(&s, 1).unwrap();
        assert_eq!(b.values, vec![-5.0]);
    }

    #[test]
    fn rejects_bad_k() {
        let s = DMatrix::<f64>::identity(3, 3);
        assert!(top_k_eigen(&s, 0).is_err());
        assert!(top_k_eigen(&s, 4).is_err());
    }

    #[test]
    fn projection_of_identity_basis() {
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 3.0, 2.0, 1.0]));
        let basis = EigenBasis {
            values: vec![4.0, 3.0],
            vectors: DMatrix::identity(4, 2),
        };
        assert_eq!(project(&basis, &s), s.rows(0, 2).into_owned());
        assert_eq!(project(&basis, &DMatrix::zeros(4, 4)), DMatrix::zeros(2, 4));
    }

    #[test]
    fn rank_k_special_cases() {
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 1.0]));
        assert_eq!(best_rank_k(&s, 1).unwrap(), DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 0.0, 0.0])));
        let full = best_rank_k(&s, 3).unwrap();
        assert_relative_eq!(full, s, epsilon = 1e-9);
    }
}
