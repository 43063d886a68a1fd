//! Seeded sampling of CLSBM instances.
//!
//! A dataset seed is split into three domain-separated sub-streams (see
//! [`crate::rng::stream`]): the assignment, the graph and the attributes.
//! Given the assignment the graph and the attributes are drawn from
//! unrelated streams, so they are conditionally independent by construction.

use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::model::{CommunityAssignment, ModelParams};
use crate::rng::{self, stream};

/// Edge labels of an undirected graph, stored as one `n x n` label matrix.
///
/// Entry `(i, j)` is the unique `l` with `A_l(i, j) = 1`. The diagonal is 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    n: usize,
    labels: Vec<u16>,
}

impl LabeledGraph {
    /// Graph with every pair labeled 0.
    pub fn empty(n: usize) -> Self {
        LabeledGraph {
            n,
            labels: vec![0; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn label(&self, i: usize, j: usize) -> u16 {
        self.labels[i * self.n + j]
    }

    /// Set the label of the unordered pair `{i, j}`, `i != j`.
    pub fn set(&mut self, i: usize, j: usize, label: u16) {
        assert_ne!(i, j, "self-loops carry the null label");
        self.labels[i * self.n + j] = label;
        self.labels[j * self.n + i] = label;
    }

    /// Row `i` of the label matrix.
    pub fn row(&self, i: usize) -> &[u16] {
        &self.labels[i * self.n..(i + 1) * self.n]
    }

    pub fn max_label(&self) -> u16 {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    /// The indicator matrix `A_l`. `A_0` has ones on the diagonal.
    pub fn indicator(&self, l: u16) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| if self.label(i, j) == l { 1.0 } else { 0.0 })
    }

    /// Upper-triangle pairs `(i, j, label)` with a nonzero label.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u16)> + '_ {
        (0..self.n).flat_map(move |i| {
            ((i + 1)..self.n).filter_map(move |j| {
                let l = self.label(i, j);
                (l != 0).then_some((i, j, l))
            })
        })
    }

    /// Reorder nodes: node `i` of the result is node `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let n = self.n;
        let mut labels = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                labels[i * n + j] = self.label(order[i], order[j]);
            }
        }
        LabeledGraph { n, labels }
    }
}

/// Node attributes, `d x n`; column `i` is `x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeMatrix(pub DMatrix<f64>);

impl AttributeMatrix {
    pub fn d(&self) -> usize {
        self.0.nrows()
    }

    pub fn n(&self) -> usize {
        self.0.ncols()
    }
}

/// One sampled instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub sigma: CommunityAssignment,
    pub graph: LabeledGraph,
    pub attrs: AttributeMatrix,
    pub seed: u64,
}

/// Cumulative weights normalized to end exactly at 1.
fn cumulative(weights: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cum: Vec<f64> = weights
        .into_iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect();
    let total = acc;
    for c in cum.iter_mut() {
        *c /= total;
    }
    if let Some(last) = cum.last_mut() {
        *last = 1.0;
    }
    cum
}

#[inline]
fn inverse_cdf(cum: &[f64], u: f64) -> usize {
    cum.iter().position(|&c| u < c).unwrap_or(cum.len() - 1)
}

pub fn sample_assignment(params: &ModelParams, seed: u64) -> CommunityAssignment {
    let mut rng = rng::stream_rng(seed, stream::ASSIGNMENT);
    let cum = cumulative(params.alpha.iter().copied());
    CommunityAssignment(
        (0..params.n)
            .map(|_| inverse_cdf(&cum, rng.random::<f64>()))
            .collect(),
    )
}

pub fn sample_graph(params: &ModelParams, sigma: &CommunityAssignment, seed: u64) -> LabeledGraph {
    let n = sigma.len();
    let k = params.k;
    let mut rng = rng::stream_rng(seed, stream::GRAPH);
    let laws: Vec<Vec<f64>> = (0..k * k)
        .map(|ab| cumulative(params.label_law(ab / k, ab % k)))
        .collect();
    let s = sigma.labels();
    let mut graph = LabeledGraph::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let l = inverse_cdf(&laws[s[i] * k + s[j]], rng.random::<f64>());
            if l != 0 {
                graph.set(i, j, l as u16);
            }
        }
    }
    graph
}

pub fn sample_attributes(params: &ModelParams, sigma: &CommunityAssignment, seed: u64) -> AttributeMatrix {
    let mut rng = rng::stream_rng(seed, stream::ATTRIBUTES);
    let d = params.d;
    let s = sigma.labels();
    let mut x = DMatrix::zeros(d, sigma.len());
    for (i, mut col) in x.column_iter_mut().enumerate() {
        let mean = &params.mu[s[i]];
        for r in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            col[r] = mean[r] + z;
        }
    }
    AttributeMatrix(x)
}

pub fn sample_clsbm(params: &ModelParams, seed: u64) -> Dataset {
    let sigma = sample_assignment(params, seed);
    let graph = sample_graph(params, &sigma, seed);
    let attrs = sample_attributes(params, &sigma, seed);
    Dataset {
        sigma,
        graph,
        attrs,
        seed,
    }
}
