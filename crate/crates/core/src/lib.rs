//! Contextual labeled stochastic block model.
//!
//! Sampling of labeled graphs with Gaussian node attributes, spectral
//! community detection on the aggregated matrix `S`, the information
//! divergence `D` with its reference curves, and a replicated experiment
//! harness.
//!
//! ```
//! use clsbm::{detect, misclassified_count, sample_clsbm, DetectOptions, ModelParams};
//!
//! let params = ModelParams {
//!     n: 60,
//!     k: 2,
//!     l: 1,
//!     d: 2,
//!     alpha: vec![0.5, 0.5],
//!     p: vec![
//!         vec![vec![0.5, 0.95], vec![0.95, 0.5]],
//!         vec![vec![0.5, 0.05], vec![0.05, 0.5]],
//!     ],
//!     mu: vec![vec![2.0, 0.0], vec![-2.0, 0.0]],
//! }
//! .validate()
//! .unwrap();
//! let data = sample_clsbm(&params, 7);
//! let est = detect(&data.graph, &data.attrs, 2, &DetectOptions::with_seed(7)).unwrap();
//! let score = misclassified_count(&data.sigma, &est, 2).unwrap();
//! assert!(score.rate < 0.1);
//! ```

pub mod aggregate;
pub mod divergence;
pub mod error;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod sampler;
pub mod spectral;

pub use aggregate::{build_S, expected_S, sample_weights, AggregatedMatrix, LabelWeights};
pub use divergence::{
    bound_curves, ch_divergence_lsbm, divergence_closed_form, divergence_numeric_oracle, divergence_oracle,
    gaussian_kl, pair_objective, snr, BoundCurve, DivergenceMethod, DivergenceReport,
};
pub use error::{Error, Result};
pub use harness::{
    emit_csv, emit_plot_data, run_experiment, run_experiment_with, Execution, ExperimentConfig, ExperimentResult,
    PointSummary, ReplicationRow, SweepPath, SweepSpec,
};
pub use metrics::{confusion_matrix, misclassified_count, MisclassificationResult};
pub use model::{
    assumption_certificate, block_matrix, population_matrix, validate_params, AssumptionCertificate, BlockVariant,
    CommunityAssignment, ModelParams,
};
pub use sampler::{sample_assignment, sample_attributes, sample_clsbm, sample_graph, AttributeMatrix, Dataset, LabeledGraph};
pub use spectral::{best_rank_k, detect, detect_full, project, top_k_eigen, DetectOptions, Detection, EigenBasis};
