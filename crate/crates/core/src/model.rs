//! Model parameters, validation and population-level matrices.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on probability-vector sums.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Generative parameters of a contextual labeled SBM.
///
/// `p[l][i][j]` is the probability that a pair with communities `(i, j)`
/// carries label `l`; label 0 means "no edge". `mu[k]` is the attribute mean
/// of community `k`. Communities are 0-indexed here and 1-indexed in files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub d: usize,
    pub alpha: Vec<f64>,
    #[serde(rename = "P")]
    pub p: Vec<Vec<Vec<f64>>>,
    pub mu: Vec<Vec<f64>>,
}

/// Which normalization of the aggregated block matrix to use.
///
/// `Paper` is `(1/(2L)) sum_l P_l`; `Expectation` is `(1/2) sum_l P_l`, the
/// off-diagonal mean of `sum_l w_l A_l` under uniform weights. They agree at
/// `L = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockVariant {
    #[default]
    Paper,
    Expectation,
}

impl std::str::FromStr for BlockVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(BlockVariant::Paper),
            "expectation" => Ok(BlockVariant::Expectation),
            other => Err(Error::Config(format!("unknown block variant {other:?}"))),
        }
    }
}

impl ModelParams {
    /// Probability of label `l` between communities `i` and `j`.
    #[inline]
    pub fn prob(&self, i: usize, j: usize, l: usize) -> f64 {
        self.p[l][i][j]
    }

    /// Label distribution `P(i, j, .)` over `0..=L`.
    pub fn label_law(&self, i: usize, j: usize) -> Vec<f64> {
        (0..=self.l).map(|l| self.p[l][i][j]).collect()
    }

    /// Attribute means as a `d x K` matrix (column `k` is `mu_k`).
    pub fn mu_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.d, self.k, |r, c| self.mu[c][r])
    }

    pub fn mu_vector(&self, k: usize) -> DVector<f64> {
        DVector::from_column_slice(&self.mu[k])
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ModelParams = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParams(format!("malformed model JSON: {e}")))?;
        raw.validate()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model params serialize")
    }

    /// Check only the array shapes against `K`, `L` and `d`.
    pub fn check_shapes(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.alpha.len() != self.k {
            return bad(format!("alpha has length {}, expected K = {}", self.alpha.len(), self.k));
        }
        if self.p.len() != self.l + 1 {
            return bad(format!("P has {} label slices, expected L + 1 = {}", self.p.len(), self.l + 1));
        }
        for (l, slice) in self.p.iter().enumerate() {
            if slice.len() != self.k || slice.iter().any(|row| row.len() != self.k) {
                return bad(format!("P slice {l} is not {k} x {k}", k = self.k));
            }
        }
        if self.mu.len() != self.k {
            return bad(format!("mu has {} columns, expected K = {}", self.mu.len(), self.k));
        }
        if let Some(k) = self.mu.iter().position(|m| m.len() != self.d) {
            return bad(format!("mu column {} has length {}, expected d = {}", k + 1, self.mu[k].len(), self.d));
        }
        Ok(())
    }

    /// Return the parameters unchanged if every invariant holds, else the first violation.
    pub fn validate(self) -> Result<Self> {
        validate_params(self)
    }
}

/// Enforce all `ModelParams` invariants. Indices in messages are 1-based.
pub fn validate_params(raw: ModelParams) -> Result<ModelParams> {
    let bad = |msg: String| Err(Error::InvalidParams(msg));
    if raw.n == 0 {
        return bad("n must be positive".into());
    }
    if raw.k < 2 {
        return bad(format!("K must be at least 2, got {}", raw.k));
    }
    if raw.l == 0 {
        return bad("L must be at least 1".into());
    }
    if raw.l > u16::MAX as usize {
        return bad(format!("L = {} exceeds the supported maximum {}", raw.l, u16::MAX));
    }
    if raw.d == 0 {
        return bad("d must be positive".into());
    }
    raw.check_shapes()?;

    let alpha_sum: f64 = raw.alpha.iter().sum();
    if raw.alpha.iter().any(|a| !a.is_finite() || *a <= 0.0) || (alpha_sum - 1.0).abs() > SIMPLEX_TOL {
        return bad(format!("alpha not a probability vector (sum {alpha_sum})"));
    }

    for l in 0..=raw.l {
        for i in 0..raw.k {
            for j in 0..raw.k {
                let v = raw.p[l][i][j];
                if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                    return bad(format!("P({},{},{}) = {v} is not in [0, 1]", i + 1, j + 1, l));
                }
            }
        }
    }
    for i in 0..raw.k {
        for j in 0..raw.k {
            let s: f64 = (0..=raw.l).map(|l| raw.p[l][i][j]).sum();
            if (s - 1.0).abs() > SIMPLEX_TOL {
                return bad(format!("P({},{},.) sums to {s}, not 1", i + 1, j + 1));
            }
        }
    }
    for i in 0..raw.k {
        for j in (i + 1)..raw.k {
            if let Some(l) = (0..=raw.l).find(|&l| raw.p[l][i][j] != raw.p[l][j][i]) {
                return bad(format!(
                    "P not symmetric in first two indices: P({a},{b},{l}) != P({b},{a},{l})",
                    a = i + 1,
                    b = j + 1
                ));
            }
        }
    }
    if raw.mu.iter().flatten().any(|v| !v.is_finite()) {
        return bad("mu has non-finite entries".into());
    }
    Ok(raw)
}

/// Tight constants of the boundedness assumption on `P` and `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCertificate {
    /// `max P(i,j,l)/P(i,k,l)` over `l >= 1`; infinite when some referenced entry is zero.
    pub eta1: f64,
    /// `max_k ||mu_k||_2`.
    pub eta2: f64,
    /// `max_{i,j,l>=1} P(i,j,l)`.
    pub pbar: f64,
}

impl AssumptionCertificate {
    pub fn eta1_finite(&self) -> bool {
        self.eta1.is_finite()
    }
}

pub fn assumption_certificate(params: &ModelParams) -> AssumptionCertificate {
    let mut eta1: f64 = 1.0;
    for l in 1..=params.l {
        for row in &params.p[l] {
            let hi = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = row.iter().cloned().fold(f64::INFINITY, f64::min);
            eta1 = if lo > 0.0 { eta1.max(hi / lo) } else { f64::INFINITY };
        }
    }
    let pbar = (1..=params.l)
        .flat_map(|l| params.p[l].iter().flatten())
        .cloned()
        .fold(0.0, f64::max);
    let eta2 = params
        .mu
        .iter()
        .map(|m| m.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    AssumptionCertificate { eta1, eta2, pbar }
}

/// Ground truth or estimated community map, 0-indexed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CommunityAssignment(pub Vec<usize>);

impl CommunityAssignment {
    pub fn new(labels: Vec<usize>) -> Self {
        CommunityAssignment(labels)
    }

    /// Build from 1-indexed labels, checking each lies in `1..=k`.
    pub fn from_one_based(labels: &[usize], k: usize) -> Result<Self> {
        labels
            .iter()
            .enumerate()
            .map(|(index, &label)| {
                if (1..=k).contains(&label) {
                    Ok(label - 1)
                } else {
                    Err(Error::LabelOutOfRange { index, label, max: k })
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(CommunityAssignment)
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|c| c + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[usize] {
        &self.0
    }

    /// Community sizes, for `k` communities.
    pub fn sizes(&self, k: usize) -> Vec<usize> {
        let mut out = vec![0; k];
        for &c in &self.0 {
            out[c] += 1;
        }
        out
    }
}

/// Aggregated `K x K` block matrix of the nonzero labels.
pub fn block_matrix(params: &ModelParams, variant: BlockVariant) -> DMatrix<f64> {
    let scale = match variant {
        BlockVariant::Paper => 1.0 / (2.0 * params.l as f64),
        BlockVariant::Expectation => 0.5,
    };
    DMatrix::from_fn(params.k, params.k, |i, j| {
        scale * (1..=params.l).map(|l| params.p[l][i][j]).sum::<f64>()
    })
}

/// `Z (P_block + mu^T mu / n) Z^T`, the rank-`K` part of the population matrix.
pub fn population_matrix(
    params: &ModelParams,
    sigma: &CommunityAssignment,
    variant: BlockVariant,
) -> Result<DMatrix<f64>> {
    if sigma.len() != params.n {
        return Err(Error::DimensionMismatch {
            what: "community assignment",
            expected: params.n,
            found: sigma.len(),
        });
    }
    let mu = params.mu_matrix();
    let inv_n = 1.0 / params.n as f64;
    let core = block_matrix(params, variant) + mu.transpose() * &mu * inv_n;
    let s = sigma.labels();
    Ok(DMatrix::from_fn(params.n, params.n, |i, j| core[(s[i], s[j])]))
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Symmetric two-label-free model with `P(.,.,1) = [[a,b],[b,a]]`.
    pub fn two_block(n: usize, a: f64, b: f64, mu: [[f64; 2]; 2]) -> ModelParams {
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
            mu: mu.iter().map(|m| m.to_vec()).collect(),
        }
    }
}
