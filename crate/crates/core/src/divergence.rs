//! The divergence `D(alpha, P, mu)` that governs the exponential lower bound,
//! the SNR of the spectral upper bound, and the two reference curves.
//!
//! Two independent routes are provided for `D`:
//!
//! * [`divergence_closed_form`] maximizes, for each community pair, the
//!   sparse-regime Chernoff-type objective [`pair_objective`] over `t`.
//! * [`divergence_numeric_oracle`] evaluates the min-max KL problem directly:
//!   for each `t` it forms the geometric tilt of the two label laws (over all
//!   labels, including 0) and the Gaussian with mean `(1-t) mu_1 + t mu_2`,
//!   and bisects on `t` until the KL sums towards both communities agree.
//!
//! The closed form drops the label-0 terms, so the two agree only up to a
//! relative error of order `max P`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{block_matrix, BlockVariant, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceMethod {
    ClosedForm,
    NumericOracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    #[serde(rename = "D")]
    pub d: f64,
    /// Minimizing community pair, 0-indexed.
    pub k1: usize,
    pub k2: usize,
    pub t_star: f64,
    /// Topological part at the optimum.
    #[serde(rename = "DA")]
    pub da: f64,
    /// Attribute part at the optimum, already divided by `n`.
    #[serde(rename = "DX_over_n")]
    pub dx_over_n: f64,
    pub method: DivergenceMethod,
    /// Oracle only: the KL sums towards `k1` and `k2` at `t_star`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kl_sums: Option<[f64; 2]>,
}

/// `||mu_1 - mu_2||^2 / 2`, the KL divergence between unit-covariance Gaussians.
pub fn gaussian_kl(mu1: &[f64], mu2: &[f64]) -> Result<f64> {
    if mu1.len() != mu2.len() {
        return Err(Error::DimensionMismatch {
            what: "Gaussian mean",
            expected: mu1.len(),
            found: mu2.len(),
        });
    }
    Ok(0.5 * sq_dist(mu1, mu2))
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `a^(1-t) b^t`, extended continuously: a zero base with a positive
/// exponent gives 0, and a zero exponent drops its factor.
#[inline]
pub fn geometric_mix(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 || a == b {
        a
    } else if t == 1.0 {
        b
    } else if a == 0.0 || b == 0.0 {
        0.0
    } else {
        ((1.0 - t) * a.ln() + t * b.ln()).exp()
    }
}

/// Topological and attribute parts of the pair objective at `t`.
fn pair_parts(params: &ModelParams, k1: usize, k2: usize, t: f64, n: usize) -> (f64, f64) {
    let attr = t * (1.0 - t) / (2.0 * n as f64) * sq_dist(&params.mu[k1], &params.mu[k2]);
    let mut topo = 0.0;
    let mut attr_sum = 0.0;
    for k in 0..params.k {
        let mut inner = 0.0;
        for l in 1..=params.l {
            let a = params.prob(k, k1, l);
            let b = params.prob(k, k2, l);
            if a == b {
                continue;
            }
            inner += (1.0 - t) * a + t * b - geometric_mix(a, b, t);
        }
        topo += params.alpha[k] * inner;
        attr_sum += params.alpha[k] * attr;
    }
    (topo, attr_sum)
}

/// The bracketed Chernoff-type objective for the pair `(k1, k2)` at `t`.
pub fn pair_objective(params: &ModelParams, k1: usize, k2: usize, t: f64, n: usize) -> f64 {
    let (topo, attr) = pair_parts(params, k1, k2, t, n);
    topo + attr
}

const GRID_POINTS: usize = 1001;
const T_TOL: f64 = 1e-10;

/// Maximize a concave function on `[0, 1]`: best point of a uniform grid,
/// then golden-section search on the two neighbouring cells.
fn maximize_on_unit(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let step = 1.0 / (GRID_POINTS - 1) as f64;
    let mut best = (0.0, f(0.0));
    for i in 1..GRID_POINTS {
        let t = i as f64 * step;
        let v = f(t);
        if v > best.1 {
            best = (t, v);
        }
    }
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let mut lo = (best.0 - step).max(0.0);
    let mut hi = (best.0 + step).min(1.0);
    let mut c = hi - invphi * (hi - lo);
    let mut d = lo + invphi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > T_TOL {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - invphi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + invphi * (hi - lo);
            fd = f(d);
        }
    }
    for (t, v) in [(c, fc), (d, fd)] {
        if v > best.1 {
            best = (t, v);
        }
    }
    best
}

/// Closed-form `D`: min over pairs of the max over `t` of [`pair_objective`].
pub fn divergence_closed_form(params: &ModelParams, n: usize) -> DivergenceReport {
    let mut best: Option<DivergenceReport> = None;
    for k1 in 0..params.k {
        for k2 in (k1 + 1)..params.k {
            let (t, _) = maximize_on_unit(|t| pair_objective(params, k1, k2, t, n));
            let (da, dx_over_n) = pair_parts(params, k1, k2, t, n);
            let report = DivergenceReport {
                d: da + dx_over_n,
                k1,
                k2,
                t_star: t,
                da,
                dx_over_n,
                method: DivergenceMethod::ClosedForm,
                kl_sums: None,
            };
            if best.as_ref().is_none_or(|b| report.d < b.d) {
                best = Some(report);
            }
        }
    }
    best.expect("K >= 2 gives at least one pair")
}

/// CH-divergence of the pure labeled SBM: the closed form with `mu = 0`.
pub fn ch_divergence_lsbm(params: &ModelParams, n: usize) -> f64 {
    let mut stripped = params.clone();
    for m in stripped.mu.iter_mut() {
        m.iter_mut().for_each(|v| *v = 0.0);
    }
    divergence_closed_form(&stripped, n).d
}

fn categorical_kl(q: &[f64], p: &[f64]) -> f64 {
    q.iter()
        .zip(p)
        .filter(|(qi, _)| **qi > 0.0)
        .map(|(qi, pi)| qi * (qi / pi).ln())
        .sum()
}

/// Quantities of the min-max KL problem at a given `t`.
struct OracleEval {
    a1: f64,
    a2: f64,
    x1: f64,
    x2: f64,
}

fn oracle_eval(params: &ModelParams, k1: usize, k2: usize, t: f64) -> OracleEval {
    let (mut a1, mut a2) = (0.0, 0.0);
    for k in 0..params.k {
        let p1 = params.label_law(k, k1);
        let p2 = params.label_law(k, k2);
        let mut q: Vec<f64> = p1.iter().zip(&p2).map(|(&a, &b)| geometric_mix(a, b, t)).collect();
        let z: f64 = q.iter().sum();
        q.iter_mut().for_each(|v| *v /= z);
        a1 += params.alpha[k] * categorical_kl(&q, &p1);
        a2 += params.alpha[k] * categorical_kl(&q, &p2);
    }
    let (m1, m2) = (&params.mu[k1], &params.mu[k2]);
    let mean: Vec<f64> = m1.iter().zip(m2).map(|(a, b)| (1.0 - t) * a + t * b).collect();
    OracleEval {
        a1,
        a2,
        x1: 0.5 * sq_dist(&mean, m1),
        x2: 0.5 * sq_dist(&mean, m2),
    }
}

/// Numeric min-max KL evaluation of `D` for one pair `(k1, k2)`.
///
/// Requires every label of both target columns to have positive probability.
pub fn divergence_numeric_oracle(params: &ModelParams, k1: usize, k2: usize, n: usize) -> Result<DivergenceReport> {
    for column in [k1, k2] {
        for k in 0..params.k {
            for l in 0..=params.l {
                if params.prob(k, column, l) <= 0.0 {
                    return Err(Error::OracleSupport {
                        k: k + 1,
                        column: column + 1,
                        label: l,
                    });
                }
            }
        }
    }
    let inv_n = 1.0 / n as f64;
    let sides = |e: &OracleEval| (e.a1 + e.x1 * inv_n, e.a2 + e.x2 * inv_n);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut t = 0.5;
    for _ in 0..200 {
        t = 0.5 * (lo + hi);
        let (f1, f2) = sides(&oracle_eval(params, k1, k2, t));
        let gap = f1 - f2;
        if gap.abs() <= 1e-12 * (f1.abs() + f2.abs()).max(1e-300) || gap == 0.0 {
            break;
        }
        // f1 grows and f2 shrinks with t
        if gap < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo <= f64::EPSILON * 0.5 {
            break;
        }
    }
    let e = oracle_eval(params, k1, k2, t);
    let (f1, f2) = sides(&e);
    let da = (1.0 - t) * e.a1 + t * e.a2;
    let dx_over_n = ((1.0 - t) * e.x1 + t * e.x2) * inv_n;
    Ok(DivergenceReport {
        d: da + dx_over_n,
        k1,
        k2,
        t_star: t,
        da,
        dx_over_n,
        method: DivergenceMethod::NumericOracle,
        kl_sums: Some([f1, f2]),
    })
}

/// Numeric oracle minimized over all community pairs.
pub fn divergence_oracle(params: &ModelParams, n: usize) -> Result<DivergenceReport> {
    let mut best: Option<DivergenceReport> = None;
    for k1 in 0..params.k {
        for k2 in (k1 + 1)..params.k {
            let report = divergence_numeric_oracle(params, k1, k2, n)?;
            if best.as_ref().is_none_or(|b| report.d < b.d) {
                best = Some(report);
            }
        }
    }
    Ok(best.expect("K >= 2 gives at least one pair"))
}

/// Minimum squared column separation of `P_block + mu^T mu / n`.
pub fn snr(params: &ModelParams, n: usize, variant: BlockVariant) -> f64 {
    let pb = block_matrix(params, variant);
    let inv_n = 1.0 / n as f64;
    let mut best = f64::INFINITY;
    for k1 in 0..params.k {
        for k2 in (k1 + 1)..params.k {
            let delta: Vec<f64> = params.mu[k1].iter().zip(&params.mu[k2]).map(|(a, b)| a - b).collect();
            let v: f64 = (0..params.k)
                .map(|k| {
                    let proj: f64 = delta.iter().zip(&params.mu[k]).map(|(a, b)| a * b).sum();
                    let e = pb[(k, k1)] - pb[(k, k2)] + inv_n * proj;
                    e * e
                })
                .sum();
            best = best.min(v);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    /// `n exp(-n D)`, the expected-misclassification lower bound.
    pub lower: f64,
    /// `c K / (n SNR)`, the spectral upper bound up to its constant.
    pub upper: f64,
    pub snr: f64,
    #[serde(rename = "D")]
    pub d: f64,
}

impl BoundCurve {
    /// Build from precomputed `D` and SNR. Both bounds are clamped to `[0, n]`;
    /// a zero SNR gives the vacuous upper bound `n`.
    pub fn from_parts(d: f64, snr: f64, n: usize, k: usize, constant_c: f64) -> Self {
        let nf = n as f64;
        let lower = (nf * (-nf * d).exp()).clamp(0.0, nf);
        let upper = if snr > 0.0 {
            (constant_c * k as f64 / (nf * snr)).clamp(0.0, nf)
        } else {
            nf
        };
        BoundCurve { lower, upper, snr, d }
    }
}

pub fn bound_curves(params: &ModelParams, n: usize, constant_c: f64, variant: BlockVariant) -> Result<BoundCurve> {
    if !(constant_c > 0.0 && constant_c.is_finite()) {
        return Err(Error::Config(format!("bound constant must be positive, got {constant_c}")));
    }
    let d = divergence_closed_form(params, n).d;
    let s = snr(params, n, variant);
    Ok(BoundCurve::from_parts(d, s, n, params.k, constant_c))
}
