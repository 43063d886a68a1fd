//! The aggregated factor matrix `S = sum_l w_l A_l + (1/n) X^T X`.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CommunityAssignment, ModelParams};
use crate::rng::{self, stream};
use crate::sampler::{AttributeMatrix, LabeledGraph};

/// One weight per nonzero label; `w[l - 1]` multiplies `A_l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelWeights(Vec<f64>);

impl LabelWeights {
    /// Fixed user weights. Each must lie in `[0, 1]`.
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if let Some(i) = w.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Config(format!("label weight {} = {} is outside [0, 1]", i + 1, w[i])));
        }
        Ok(LabelWeights(w))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Weight of label `l`, with label 0 weighted 0.
    #[inline]
    pub fn of_label(&self, l: u16) -> f64 {
        if l == 0 {
            0.0
        } else {
            self.0[l as usize - 1]
        }
    }
}

/// `L` i.i.d. Uniform[0, 1] weights.
pub fn sample_weights(l: usize, seed: u64) -> LabelWeights {
    let mut rng = rng::stream_rng(seed, stream::WEIGHTS);
    LabelWeights((0..l).map(|_| rng.random::<f64>()).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedMatrix {
    pub s: DMatrix<f64>,
    pub weights: LabelWeights,
}

const DUMP_MAGIC: &[u8; 8] = b"CLSBMS\0\x01";

impl AggregatedMatrix {
    pub fn n(&self) -> usize {
        self.s.nrows()
    }

    /// Debug dump: 8-byte magic, `n` as little-endian u64, then the
    /// entries row-major as little-endian f64.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let n = self.n();
        let mut buf = Vec::with_capacity(16 + 8 * n * n);
        buf.extend_from_slice(DUMP_MAGIC);
        buf.extend_from_slice(&(n as u64).to_le_bytes());
        for i in 0..n {
            for j in 0..n {
                buf.extend_from_slice(&self.s[(i, j)].to_le_bytes());
            }
        }
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(&buf))
            .map_err(|e| Error::io(path, e))
    }

    pub fn read_binary(path: &Path) -> Result<DMatrix<f64>> {
        let mut buf = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut buf))
            .map_err(|e| Error::io(path, e))?;
        if buf.len() < 16 || &buf[..8] != DUMP_MAGIC {
            return Err(Error::parse(path, "missing S dump header"));
        }
        let n = u64::from_le_bytes(buf[8..16].try_into().unwrap()) as usize;
        if buf.len() != 16 + 8 * n * n {
            return Err(Error::parse(path, format!("expected {} bytes of entries", 8 * n * n)));
        }
        let body = &buf[16..];
        Ok(DMatrix::from_fn(n, n, |i, j| {
            let at = 8 * (i * n + j);
            f64::from_le_bytes(body[at..at + 8].try_into().unwrap())
        }))
    }
}

#[allow(non_snake_case)]
pub fn build_S(graph: &LabeledGraph, attrs: &AttributeMatrix, weights: &LabelWeights) -> Result<AggregatedMatrix> {
    let n = graph.n();
    if attrs.n() != n {
        return Err(Error::DimensionMismatch {
            what: "attribute columns",
            expected: n,
            found: attrs.n(),
        });
    }
    let max_label = graph.max_label() as usize;
    if max_label > weights.len() {
        return Err(Error::DimensionMismatch {
            what: "label weights",
            expected: max_label,
            found: weights.len(),
        });
    }
    let x = &attrs.0;
    let inv_n = 1.0 / n as f64;
    let mut s = DMatrix::zeros(n, n);
    for j in 0..n {
        let xj = x.column(j);
        let row = graph.row(j);
        for i in 0..=j {
            let v = weights.of_label(row[i]) + inv_n * x.column(i).dot(&xj);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    Ok(AggregatedMatrix {
        s,
        weights: weights.clone(),
    })
}

/// Conditional mean of [`build_S`] given `sigma` and `weights`.
///
/// Off the diagonal this is `sum_l w_l P(s_i, s_j, l) + mu_{s_i}^T mu_{s_j} / n`;
/// on the diagonal it is `(||mu_{s_i}||^2 + d) / n`.
#[allow(non_snake_case)]
pub fn expected_S(params: &ModelParams, sigma: &CommunityAssignment, weights: &LabelWeights) -> DMatrix<f64> {
    let k = params.k;
    let n = sigma.len();
    let inv_n = 1.0 / n as f64;
    let mu = params.mu_matrix();
    let gram = mu.transpose() * &mu;
    let graph_part = DMatrix::from_fn(k, k, |a, b| {
        (1..=params.l).map(|l| weights.0[l - 1] * params.prob(a, b, l)).sum::<f64>()
    });
    let s = sigma.labels();
    DMatrix::from_fn(n, n, |i, j| {
        let (a, b) = (s[i], s[j]);
        if i == j {
            (gram[(a, a)] + params.d as f64) * inv_n
        } else {
            graph_part[(a, b)] + gram[(a, b)] * inv_n
        }
    })
}
