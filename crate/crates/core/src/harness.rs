//! Replicated sample-detect-score experiments over parameter sweeps.
//!
//! A sweep is a list of `(path, values)` entries; each value of each entry is
//! one sweep point, obtained by changing that single parameter of the base
//! model. Supported paths:
//!
//! * `n`: number of nodes
//! * `mu_scale`: multiply every attribute mean by the value
//! * `p_mix`: move `P` towards the block-uniform law
//!   `Pbar(l) = sum_{a,b} alpha_a alpha_b P(a, b, l)` by the given fraction

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregate::LabelWeights;
use crate::divergence::{divergence_closed_form, snr, BoundCurve};
use crate::error::{Error, Result};
use crate::metrics::misclassified_count;
use crate::model::{BlockVariant, ModelParams};
use crate::rng::replication_seed;
use crate::sampler::sample_clsbm;
use crate::spectral::{detect, DetectOptions, DEFAULT_MAX_ITER, DEFAULT_RESTARTS};

pub const DEFAULT_BOUND_CONSTANT: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepPath {
    #[serde(rename = "n")]
    N,
    #[serde(rename = "mu_scale")]
    MuScale,
    #[serde(rename = "p_mix")]
    PMix,
}

impl SweepPath {
    pub fn name(self) -> &'static str {
        match self {
            SweepPath::N => "n",
            SweepPath::MuScale => "mu_scale",
            SweepPath::PMix => "p_mix",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub path: SweepPath,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectConfig {
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    /// Fixed label weights; drawn per replication when absent.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

fn default_restarts() -> usize {
    DEFAULT_RESTARTS
}

fn default_bound_constant() -> f64 {
    DEFAULT_BOUND_CONSTANT
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            restarts: DEFAULT_RESTARTS,
            weights: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelParams,
    pub sweep: Vec<SweepSpec>,
    pub replications: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub detect: DetectConfig,
    #[serde(default = "default_bound_constant")]
    pub bound_constant: f64,
    #[serde(default)]
    pub snr_variant: BlockVariant,
}

/// One parameter setting of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub path: SweepPath,
    pub value: f64,
    pub params: ModelParams,
}

fn apply_sweep(base: &ModelParams, path: SweepPath, value: f64) -> Result<ModelParams> {
    if !value.is_finite() {
        return Err(Error::Config(format!("sweep value for {} is not finite", path.name())));
    }
    let mut p = base.clone();
    match path {
        SweepPath::N => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(Error::Config(format!("n must be a positive integer, got {value}")));
            }
            p.n = value as usize;
        }
        SweepPath::MuScale => {
            for m in p.mu.iter_mut() {
                m.iter_mut().for_each(|v| *v *= value);
            }
        }
        SweepPath::PMix => {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Config(format!("p_mix must lie in [0, 1], got {value}")));
            }
            for slice in p.p.iter_mut() {
                let mut pbar = 0.0;
                for (a, row) in slice.iter().enumerate() {
                    for (b, v) in row.iter().enumerate() {
                        pbar += base.alpha[a] * base.alpha[b] * v;
                    }
                }
                for v in slice.iter_mut().flatten() {
                    *v = (1.0 - value) * *v + value * pbar;
                }
            }
        }
    }
    p.validate()
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed experiment JSON: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.clone().validate()?;
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if !(self.bound_constant > 0.0 && self.bound_constant.is_finite()) {
            return Err(Error::Config(format!("bound_constant must be positive, got {}", self.bound_constant)));
        }
        if self.detect.restarts == 0 {
            return Err(Error::Config("detect.restarts must be at least 1".into()));
        }
        if let Some(w) = &self.detect.weights {
            if w.len() != self.model.l {
                return Err(Error::Config(format!("detect.weights has {} entries, expected L = {}", w.len(), self.model.l)));
            }
            LabelWeights::new(w.clone())?;
        }
        self.points().map(|_| ())
    }

    /// All sweep points in order, each validated.
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        let mut out = Vec::new();
        for spec in &self.sweep {
            for &value in &spec.values {
                out.push(SweepPoint {
                    path: spec.path,
                    value,
                    params: apply_sweep(&self.model, spec.path, value)?,
                });
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRow {
    pub point: usize,
    pub sweep_param: String,
    pub sweep_value: f64,
    pub replication: usize,
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub misclassified: Option<usize>,
    pub rate: Option<f64>,
    pub runtime_ms: u64,
    pub failed: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub point: usize,
    pub sweep_param: String,
    pub sweep_value: f64,
    pub n: usize,
    /// Mean over successful replications; NaN when all failed.
    pub mean_rate: f64,
    pub stderr: f64,
    pub successes: usize,
    pub failures: usize,
    pub d: f64,
    pub snr: f64,
    /// Bounds on the misclassified count.
    pub lower: f64,
    pub upper: f64,
}

impl PointSummary {
    pub fn lower_rate(&self) -> f64 {
        self.lower / self.n as f64
    }

    pub fn upper_rate(&self) -> f64 {
        self.upper / self.n as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub rows: Vec<ReplicationRow>,
    pub points: Vec<PointSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

fn run_replication(config: &ExperimentConfig, point: usize, sp: &SweepPoint, rep: usize) -> ReplicationRow {
    let seed = replication_seed(config.master_seed, point as u64, rep as u64);
    let start = Instant::now();
    let outcome = (|| {
        let ds = sample_clsbm(&sp.params, seed);
        let options = DetectOptions {
            seed,
            restarts: config.detect.restarts,
            max_iter: DEFAULT_MAX_ITER,
            weights: config.detect.weights.clone().map(LabelWeights::new).transpose()?,
            num_labels: Some(sp.params.l),
        };
        let est = detect(&ds.graph, &ds.attrs, sp.params.k, &options)?;
        misclassified_count(&ds.sigma, &est, sp.params.k)
    })();
    let runtime_ms = start.elapsed().as_millis() as u64;
    let (misclassified, rate, error) = match outcome {
        Ok(m) => (Some(m.count), Some(m.rate), None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    ReplicationRow {
        point,
        sweep_param: sp.path.name().to_string(),
        sweep_value: sp.value,
        replication: rep,
        seed,
        n: sp.params.n,
        k: sp.params.k,
        misclassified,
        rate,
        runtime_ms,
        failed: error.is_some(),
        error,
    }
}

fn summarize(config: &ExperimentConfig, point: usize, sp: &SweepPoint, rows: &[ReplicationRow]) -> PointSummary {
    let rates: Vec<f64> = rows.iter().filter_map(|r| r.rate).collect();
    let m = rates.len();
    let mean_rate = if m == 0 { f64::NAN } else { rates.iter().sum::<f64>() / m as f64 };
    let stderr = if m < 2 {
        0.0
    } else {
        let var = rates.iter().map(|r| (r - mean_rate).powi(2)).sum::<f64>() / (m - 1) as f64;
        (var / m as f64).sqrt()
    };
    let n = sp.params.n;
    let d = divergence_closed_form(&sp.params, n).d;
    let s = snr(&sp.params, n, config.snr_variant);
    let curve = BoundCurve::from_parts(d, s, n, sp.params.k, config.bound_constant);
    PointSummary {
        point,
        sweep_param: sp.path.name().to_string(),
        sweep_value: sp.value,
        n,
        mean_rate,
        stderr,
        successes: m,
        failures: rows.len() - m,
        d,
        snr: s,
        lower: curve.lower,
        upper: curve.upper,
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    run_experiment_with(config, Execution::Parallel)
}

pub fn run_experiment_with(config: &ExperimentConfig, execution: Execution) -> Result<ExperimentResult> {
    config.validate()?;
    let points = config.points()?;
    let tasks: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..config.replications).map(move |r| (p, r)))
        .collect();
    let run = |&(p, r): &(usize, usize)| run_replication(config, p, &points[p], r);
    let mut rows: Vec<ReplicationRow> = match execution {
        Execution::Parallel => tasks.par_iter().map(run).collect(),
        Execution::Sequential => tasks.iter().map(run).collect(),
    };
    rows.sort_by_key(|r| (r.point, r.replication));
    let summaries = points
        .iter()
        .enumerate()
        .map(|(p, sp)| {
            let lo = rows.partition_point(|r| r.point < p);
            let hi = rows.partition_point(|r| r.point <= p);
            summarize(config, p, sp, &rows[lo..hi])
        })
        .collect();
    Ok(ExperimentResult { rows, points: summaries })
}

pub const CSV_HEADER: [&str; 10] = [
    "sweep_param",
    "sweep_value",
    "replication",
    "seed",
    "n",
    "K",
    "misclassified",
    "rate",
    "runtime_ms",
    "failed",
];

pub const PLOT_HEADER: [&str; 7] = [
    "sweep_value",
    "mean_rate",
    "stderr",
    "lower_bound_rate",
    "upper_bound_rate",
    "D",
    "SNR",
];

fn write_table(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let to_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Config(format!("csv writer: {other:?}")),
    };
    let mut w = csv::Writer::from_path(path).map_err(to_err)?;
    w.write_record(header).map_err(to_err)?;
    for row in rows {
        w.write_record(&row).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One line per replication; failed rows leave `misclassified` and `rate` empty.
pub fn emit_csv(result: &ExperimentResult, path: &Path) -> Result<()> {
    write_table(
        path,
        &CSV_HEADER,
        result.rows.iter().map(|r| {
            vec![
                r.sweep_param.clone(),
                r.sweep_value.to_string(),
                r.replication.to_string(),
                r.seed.to_string(),
                r.n.to_string(),
                r.k.to_string(),
                r.misclassified.map_or(String::new(), |m| m.to_string()),
                r.rate.map_or(String::new(), |v| v.to_string()),
                r.runtime_ms.to_string(),
                r.failed.to_string(),
            ]
        }),
    )
}

/// One line per sweep point with the empirical mean and both bound rates.
pub fn emit_plot_data(result: &ExperimentResult, path: &Path) -> Result<()> {
    write_table(
        path,
        &PLOT_HEADER,
        result.points.iter().map(|p| {
            vec![
                p.sweep_value.to_string(),
                p.mean_rate.to_string(),
                p.stderr.to_string(),
                p.lower_rate().to_string(),
                p.upper_rate().to_string(),
                p.d.to_string(),
                p.snr.to_string(),
            ]
        }),
    )
}
