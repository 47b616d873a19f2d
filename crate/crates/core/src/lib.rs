//! # sphera-core — motor-imagery EEG classification kernels
//!
//! Algorithmic core for two-class motor-imagery EEG decoding, built around
//! a local-manifold classifier: per query point, fit a small sphere to the
//! k nearest in-class neighbors and assign the class whose sphere is
//! nearest. The crate carries the full pipeline behind that idea:
//!
//! ```text
//! EpochSet ─ filter::preprocess_set ─ filter::extract_window
//!    │
//!    ├─ csp::fit_csp / transform_set      log-variance spatial features
//!    │      └─ spa::SpaModel              sphere-distance classifier
//!    │      └─ baselines::lda             shrinkage LDA
//!    ├─ csp::normalized_covariance        SPD trial covariances
//!    │      └─ baselines::riemann         MDRM, tangent-space mapping
//!    └─ eval::kfold_cv / subsample_experiment
//! ```
//!
//! Everything is `no_std` + `alloc` and deterministic: all randomness comes
//! from counter-based generators seeded per task ([`rng`]), so results do
//! not depend on thread count or execution order. IO, file formats, and the
//! command-line driver live in the companion `sphera-tools` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod baselines;
pub mod csp;
pub mod epochs;
pub mod eval;
pub mod filter;
pub mod linalg;
pub mod rng;
pub mod spa;
pub mod split;
pub mod synth;

pub use baselines::{
    lda_fit, lda_predict, mdrm_fit, mdrm_predict, riemannian_distance, riemannian_mean, LdaModel,
    MdrmModel, TangentSpaceMap,
};
pub use csp::{csp_features, fit_csp, normalized_covariance, transform_set, CspModel, FeatureMatrix};
pub use epochs::{drop_channels, epochs_from_events, ContinuousRecording, EpochSet, Label};
pub use eval::{
    accuracy, fit_pipeline, kfold_cv, kfold_cv_with, render_tables, subsample_experiment,
    subsample_experiment_with, ClassifierSpec, ConfusionCounts, EvalReport, ExperimentOptions,
    FeatureStage, FittedPipeline, Fraction, PipelineSpec, SequentialRunner, TaskRunner,
};
pub use filter::{
    design_butterworth_bandpass, extract_window, filtfilt, magnitude_response, preprocess_set,
    BandpassSpec, BiquadCascade,
};
pub use linalg::{generalized_eigvals, solve_linear, spd_exp, spd_inv_sqrt, spd_log, sym_eig, Matrix, SymEigen};
pub use spa::{
    knn_in_class, project_to_sphere, spa_distance, spa_predict, spa_predict_detailed, spca_fit,
    tune_hyperparameters, HyperparamGrid, SpaModel, Sphere, TuneProtocol,
};
pub use synth::{min_separation, sample_mixed_sources, sample_two_manifolds, ManifoldKind, ManifoldSpec, NoisySample};
