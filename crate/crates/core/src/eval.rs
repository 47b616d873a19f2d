//! Experiment harness: pipeline assembly, stratified cross-validation,
//! small-training-set subsampling, and table rendering.
//!
//! Every experiment is a list of independent tasks (folds or replicates),
//! each a pure function of the data, the pipeline spec, and a per-task seed
//! derived from the master seed. A [`TaskRunner`] decides how tasks execute;
//! results are assembled by task index, so any runner yields byte-identical
//! reports.
//!
//! Band-pass filtering happens once, upstream of the harness: it is
//! label-independent, so it cannot leak test information. Spatial filters
//! and classifiers are fit per fold from training rows only, and an
//! instrumentation mode verifies that by poisoning test rows with NaN and
//! requiring every fitted parameter to stay finite.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::baselines::lda::{lda_fit, lda_predict, LdaError, LdaModel};
use crate::baselines::riemann::{
    mdrm_fit, mdrm_predict, riemannian_mean, MdrmModel, RiemannError, TangentSpaceMap,
    KARCHER_MAX_ITER, KARCHER_TOL,
};
use crate::csp::{
    csp_features, fit_csp, normalized_covariance, transform_set, CspError, CspModel, FeatureMatrix,
};
use crate::epochs::{EpochError, EpochSet, Label, LABEL_CLASS1};
use crate::linalg::Matrix;
use crate::rng::derive_stream;
use crate::spa::{
    spa_predict, tune_hyperparameters, HyperparamGrid, SpaError, SpaModel, TuneProtocol,
};
use crate::split::{stratified_draw, stratified_kfold, SplitError};

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    /// Classifier cannot consume what the feature stage produces.
    IncompatiblePipeline { reason: &'static str },
    /// Accuracy of zero evaluated samples is undefined.
    ZeroTotal,
    /// The NaN-poisoning instrumentation caught test data inside a fit.
    LeakageDetected { method: String },
    EmptyTestSet,
    /// A failure inside fold or replicate `run_index`.
    InRun {
        run_index: usize,
        source: alloc::boxed::Box<EvalError>,
    },
    Epoch(EpochError),
    Split(SplitError),
    Csp(CspError),
    Spa(SpaError),
    Lda(LdaError),
    Riemann(RiemannError),
}

impl core::fmt::Display for EvalError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EvalError::IncompatiblePipeline { reason } => write!(f, "incompatible pipeline: {reason}"),
            EvalError::ZeroTotal => write!(f, "no evaluated samples"),
            EvalError::LeakageDetected { method } => {
                write!(f, "leakage detected: {method} fit consumed poisoned test rows")
            }
            EvalError::EmptyTestSet => write!(f, "split leaves an empty test set"),
            EvalError::InRun { run_index, source } => write!(f, "run {run_index}: {source}"),
            EvalError::Epoch(e) => write!(f, "{e}"),
            EvalError::Split(e) => write!(f, "{e}"),
            EvalError::Csp(e) => write!(f, "{e}"),
            EvalError::Spa(e) => write!(f, "{e}"),
            EvalError::Lda(e) => write!(f, "{e}"),
            EvalError::Riemann(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for EvalError {}

impl From<EpochError> for EvalError {
    fn from(e: EpochError) -> Self {
        EvalError::Epoch(e)
    }
}
impl From<SplitError> for EvalError {
    fn from(e: SplitError) -> Self {
        EvalError::Split(e)
    }
}
impl From<CspError> for EvalError {
    fn from(e: CspError) -> Self {
        EvalError::Csp(e)
    }
}
impl From<SpaError> for EvalError {
    fn from(e: SpaError) -> Self {
        EvalError::Spa(e)
    }
}
impl From<LdaError> for EvalError {
    fn from(e: LdaError) -> Self {
        EvalError::Lda(e)
    }
}
impl From<RiemannError> for EvalError {
    fn from(e: RiemannError) -> Self {
        EvalError::Riemann(e)
    }
}

/// Class 1 is "positive" throughout.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub true_pos: usize,
    pub true_neg: usize,
    pub false_pos: usize,
    pub false_neg: usize,
}

impl ConfusionCounts {
    pub fn record(&mut self, actual: Label, predicted: Label) {
        match (actual == LABEL_CLASS1, predicted == LABEL_CLASS1) {
            (true, true) => self.true_pos += 1,
            (false, false) => self.true_neg += 1,
            (false, true) => self.false_pos += 1,
            (true, false) => self.false_neg += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.true_pos + self.true_neg + self.false_pos + self.false_neg
    }

    pub fn merge(&mut self, other: &ConfusionCounts) {
        self.true_pos += other.true_pos;
        self.true_neg += other.true_neg;
        self.false_pos += other.false_pos;
        self.false_neg += other.false_neg;
    }
}

/// Percentage of correctly classified samples.
pub fn accuracy(c: &ConfusionCounts) -> Result<f64, EvalError> {
    let total = c.total();
    if total == 0 {
        return Err(EvalError::ZeroTotal);
    }
    Ok(100.0 * (c.true_pos + c.true_neg) as f64 / total as f64)
}

/// Exact training-set fraction, kept rational for display ("1/2", "1/6").
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fraction {
    pub num: u32,
    pub den: u32,
}

impl Fraction {
    pub const fn new(num: u32, den: u32) -> Self {
        Self { num, den }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl core::fmt::Display for Fraction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// How trial features are produced.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureStage {
    Csp { pairs: usize },
    SpdCovariance,
    TangentSpace,
}

/// Which classifier consumes them.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierSpec {
    Spa {
        grid: HyperparamGrid,
        protocol: TuneProtocol,
    },
    Lda {
        shrinkage: f64,
    },
    Mdrm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSpec {
    pub features: FeatureStage,
    pub classifier: ClassifierSpec,
}

impl PipelineSpec {
    pub fn csp_spa(pairs: usize, grid: HyperparamGrid, protocol: TuneProtocol) -> Self {
        Self {
            features: FeatureStage::Csp { pairs },
            classifier: ClassifierSpec::Spa { grid, protocol },
        }
    }

    pub fn csp_lda(pairs: usize, shrinkage: f64) -> Self {
        Self {
            features: FeatureStage::Csp { pairs },
            classifier: ClassifierSpec::Lda { shrinkage },
        }
    }

    pub fn mdrm() -> Self {
        Self {
            features: FeatureStage::SpdCovariance,
            classifier: ClassifierSpec::Mdrm,
        }
    }

    pub fn ts_lda(shrinkage: f64) -> Self {
        Self {
            features: FeatureStage::TangentSpace,
            classifier: ClassifierSpec::Lda { shrinkage },
        }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        match (&self.features, &self.classifier) {
            (FeatureStage::SpdCovariance, ClassifierSpec::Mdrm) => Ok(()),
            (FeatureStage::SpdCovariance, _) => Err(EvalError::IncompatiblePipeline {
                reason: "vector classifiers need csp or tangent-space features",
            }),
            (_, ClassifierSpec::Mdrm) => Err(EvalError::IncompatiblePipeline {
                reason: "mdrm requires spd-covariance features",
            }),
            _ => Ok(()),
        }
    }

    pub fn method_name(&self) -> String {
        match (&self.features, &self.classifier) {
            (FeatureStage::SpdCovariance, ClassifierSpec::Mdrm) => String::from("mdrm"),
            (features, classifier) => {
                let stage = match features {
                    FeatureStage::Csp { .. } => "csp",
                    FeatureStage::TangentSpace => "ts",
                    FeatureStage::SpdCovariance => "cov",
                };
                let clf = match classifier {
                    ClassifierSpec::Spa { .. } => "spa",
                    ClassifierSpec::Lda { .. } => "lda",
                    ClassifierSpec::Mdrm => "mdrm",
                };
                format!("{stage}+{clf}")
            }
        }
    }
}

enum FittedFeatures {
    Csp(CspModel),
    Cov,
    Tangent(TangentSpaceMap),
}

enum FittedClassifier {
    Spa { model: SpaModel, k: usize, p: usize, oracle_tuned: bool },
    Lda(LdaModel),
    Mdrm(MdrmModel),
}

/// A pipeline fit on one training split.
pub struct FittedPipeline {
    features: FittedFeatures,
    classifier: FittedClassifier,
}

fn trial_covariances(set: &EpochSet) -> Result<Vec<Matrix>, EvalError> {
    (0..set.n_trials)
        .map(|t| normalized_covariance(&set.trial_matrix(t)).map_err(EvalError::from))
        .collect()
}

/// Fit the feature stage and classifier on `train`. `tune_eval` is consumed
/// only by the oracle tuning protocol; inner-CV tuning never sees it.
pub fn fit_pipeline(
    train: &EpochSet,
    spec: &PipelineSpec,
    tune_eval: Option<&EpochSet>,
    seed: u64,
) -> Result<FittedPipeline, EvalError> {
    spec.validate()?;
    train.require_both_classes()?;

    let (features, train_features): (FittedFeatures, Option<FeatureMatrix>) = match &spec.features {
        FeatureStage::Csp { pairs } => {
            let model = fit_csp(train, *pairs)?;
            let fm = transform_set(&model, train)?;
            (FittedFeatures::Csp(model), Some(fm))
        }
        FeatureStage::SpdCovariance => (FittedFeatures::Cov, None),
        FeatureStage::TangentSpace => {
            let covs = trial_covariances(train)?;
            let reference = riemannian_mean(&covs, KARCHER_TOL, KARCHER_MAX_ITER)?;
            let map = TangentSpaceMap::new(reference)?;
            let mut fm = FeatureMatrix::empty(map.dim());
            for (cov, &label) in covs.iter().zip(&train.labels) {
                fm.push_row(&map.tangent_map(cov)?, label);
            }
            (FittedFeatures::Tangent(map), Some(fm))
        }
    };

    let classifier = match &spec.classifier {
        ClassifierSpec::Spa { grid, protocol } => {
            let fm = train_features.ok_or(EvalError::IncompatiblePipeline {
                reason: "spa needs vector features",
            })?;
            let eval_features = match (protocol, tune_eval) {
                (TuneProtocol::OracleOnEval, Some(eval_set)) => {
                    Some(features_for_set(&features, eval_set)?)
                }
                (TuneProtocol::OracleOnEval, None) => return Err(EvalError::Spa(SpaError::MissingEvalSet)),
                _ => None,
            };
            let tuned = tune_hyperparameters(&fm, grid, *protocol, eval_features.as_ref(), seed)?;
            let model = SpaModel::new(fm, tuned.k, tuned.p)?;
            FittedClassifier::Spa {
                k: model.k,
                p: model.p,
                oracle_tuned: tuned.oracle_tuned,
                model,
            }
        }
        ClassifierSpec::Lda { shrinkage } => {
            let fm = train_features.ok_or(EvalError::IncompatiblePipeline {
                reason: "lda needs vector features",
            })?;
            FittedClassifier::Lda(lda_fit(&fm, *shrinkage)?)
        }
        ClassifierSpec::Mdrm => {
            let covs = trial_covariances(train)?;
            FittedClassifier::Mdrm(mdrm_fit(&covs, &train.labels)?)
        }
    };

    Ok(FittedPipeline { features, classifier })
}

fn features_for_set(stage: &FittedFeatures, set: &EpochSet) -> Result<FeatureMatrix, EvalError> {
    match stage {
        FittedFeatures::Csp(model) => Ok(transform_set(model, set)?),
        FittedFeatures::Tangent(map) => {
            let mut fm = FeatureMatrix::empty(map.dim());
            for t in 0..set.n_trials {
                let cov = normalized_covariance(&set.trial_matrix(t))?;
                fm.push_row(&map.tangent_map(&cov)?, set.labels[t]);
            }
            Ok(fm)
        }
        FittedFeatures::Cov => Err(EvalError::IncompatiblePipeline {
            reason: "covariance stage has no vector features",
        }),
    }
}

impl FittedPipeline {
    pub fn predict(&self, trial: &Matrix) -> Result<Label, EvalError> {
        let vector_features = |trial: &Matrix| -> Result<Vec<f64>, EvalError> {
            match &self.features {
                FittedFeatures::Csp(model) => Ok(csp_features(model, trial)?),
                FittedFeatures::Tangent(map) => {
                    let cov = normalized_covariance(trial)?;
                    Ok(map.tangent_map(&cov)?)
                }
                FittedFeatures::Cov => Err(EvalError::IncompatiblePipeline {
                    reason: "covariance stage has no vector features",
                }),
            }
        };
        match &self.classifier {
            FittedClassifier::Spa { model, .. } => Ok(spa_predict(model, &vector_features(trial)?)?),
            FittedClassifier::Lda(model) => Ok(lda_predict(model, &vector_features(trial)?)),
            FittedClassifier::Mdrm(model) => {
                let cov = normalized_covariance(trial)?;
                Ok(mdrm_predict(model, &cov)?)
            }
        }
    }

    /// Tuned (k, p) when the classifier is SPA.
    pub fn tuned_params(&self) -> Option<(usize, usize)> {
        match &self.classifier {
            FittedClassifier::Spa { k, p, .. } => Some((*k, *p)),
            _ => None,
        }
    }

    pub fn oracle_tuned(&self) -> bool {
        matches!(&self.classifier, FittedClassifier::Spa { oracle_tuned: true, .. })
    }

    /// True when every fitted parameter is finite. The leakage
    /// instrumentation relies on NaN poisoning propagating into any
    /// statistic that touched a test row.
    pub fn params_finite(&self) -> bool {
        let features_ok = match &self.features {
            FittedFeatures::Csp(m) => m.is_finite(),
            FittedFeatures::Cov => true,
            FittedFeatures::Tangent(m) => m.params_finite(),
        };
        let classifier_ok = match &self.classifier {
            FittedClassifier::Spa { model, .. } => model.params_finite(),
            FittedClassifier::Lda(m) => m.params_finite(),
            FittedClassifier::Mdrm(m) => m.params_finite(),
        };
        features_ok && classifier_ok
    }
}

/// Executes `n_tasks` independent closures and returns results in task
/// order. Implementations may parallelize; assembly by index keeps any
/// execution order equivalent.
pub trait TaskRunner {
    fn run<T: Send>(&self, n_tasks: usize, task: &(dyn Fn(usize) -> T + Sync)) -> Vec<T>;
}

/// Runs tasks on the calling thread, in order.
pub struct SequentialRunner;

impl TaskRunner for SequentialRunner {
    fn run<T: Send>(&self, n_tasks: usize, task: &(dyn Fn(usize) -> T + Sync)) -> Vec<T> {
        (0..n_tasks).map(task).collect()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExperimentOptions {
    /// Poison test rows with NaN before fitting and fail loudly if any
    /// fitted parameter becomes non-finite.
    pub poison_check: bool,
}

/// One fold or replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_index: usize,
    pub accuracy_pct: f64,
    pub confusion: ConfusionCounts,
    /// Tuned (k, p) when the classifier is SPA.
    pub k: Option<usize>,
    pub p: Option<usize>,
}

/// Echo of everything that determined a report.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigEcho {
    pub seed: u64,
    pub csp_pairs: Option<usize>,
    pub grid: Option<HyperparamGrid>,
    pub protocol: Option<TuneProtocol>,
    pub lda_shrinkage: Option<f64>,
    /// Set when hyperparameters were selected on the evaluation data.
    pub oracle_tuned: bool,
    pub poison_check: bool,
    /// Sample standard deviation (n-1 denominator) is reported.
    pub std_is_sample: bool,
}

impl ConfigEcho {
    fn from_spec(spec: &PipelineSpec, seed: u64, opts: &ExperimentOptions) -> Self {
        let csp_pairs = match &spec.features {
            FeatureStage::Csp { pairs } => Some(*pairs),
            _ => None,
        };
        let (grid, protocol) = match &spec.classifier {
            ClassifierSpec::Spa { grid, protocol } => (Some(grid.clone()), Some(*protocol)),
            _ => (None, None),
        };
        let lda_shrinkage = match &spec.classifier {
            ClassifierSpec::Lda { shrinkage } => Some(*shrinkage),
            _ => None,
        };
        Self {
            seed,
            csp_pairs,
            grid,
            protocol,
            lda_shrinkage,
            oracle_tuned: matches!(protocol, Some(TuneProtocol::OracleOnEval)),
            poison_check: opts.poison_check,
            std_is_sample: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub subject: String,
    pub method: String,
    /// "cv10" for cross-validation, "1/2" etc. for subsampling.
    pub split_label: String,
    pub runs: Vec<RunRecord>,
    pub mean_pct: f64,
    pub std_pct: f64,
    pub confusion_total: ConfusionCounts,
    pub config: ConfigEcho,
}

fn summarize(
    subject: &str,
    method: String,
    split_label: String,
    runs: Vec<RunRecord>,
    config: ConfigEcho,
) -> EvalReport {
    let n = runs.len() as f64;
    let mean_pct = runs.iter().map(|r| r.accuracy_pct).sum::<f64>() / n;
    let std_pct = if runs.len() > 1 {
        let ss: f64 = runs
            .iter()
            .map(|r| (r.accuracy_pct - mean_pct) * (r.accuracy_pct - mean_pct))
            .sum();
        libm::sqrt(ss / (n - 1.0))
    } else {
        0.0
    };
    let mut confusion_total = ConfusionCounts::default();
    for r in &runs {
        confusion_total.merge(&r.confusion);
    }
    EvalReport {
        subject: String::from(subject),
        method,
        split_label,
        runs,
        mean_pct,
        std_pct,
        confusion_total,
        config,
    }
}

/// Fit on `train_rows`, evaluate on `test_rows`. Public so integration
/// tests and the instrumentation can drive explicit splits.
pub fn run_split(
    set: &EpochSet,
    spec: &PipelineSpec,
    train_rows: &[usize],
    test_rows: &[usize],
    run_index: usize,
    task_seed: u64,
    opts: &ExperimentOptions,
) -> Result<RunRecord, EvalError> {
    if test_rows.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    let train = set.select_trials(train_rows);
    let test = set.select_trials(test_rows);
    let tune_eval = match &spec.classifier {
        ClassifierSpec::Spa {
            protocol: TuneProtocol::OracleOnEval,
            ..
        } => Some(&test),
        _ => None,
    };

    let fitted = fit_pipeline(&train, spec, tune_eval, task_seed)?;

    if opts.poison_check {
        let mut poisoned = set.clone();
        for &t in test_rows {
            for v in poisoned.trial_mut(t) {
                *v = f64::NAN;
            }
        }
        let poisoned_train = poisoned.select_trials(train_rows);
        let poisoned_eval = poisoned.select_trials(test_rows);
        let poisoned_tune_eval = tune_eval.is_some().then_some(&poisoned_eval);
        let leaked = match fit_pipeline(&poisoned_train, spec, poisoned_tune_eval, task_seed) {
            Ok(p) => !p.params_finite(),
            Err(_) => true, // clean fit succeeded above, so NaN got in
        };
        if leaked {
            return Err(EvalError::LeakageDetected {
                method: spec.method_name(),
            });
        }
    }

    let mut confusion = ConfusionCounts::default();
    for t in 0..test.n_trials {
        let predicted = fitted.predict(&test.trial_matrix(t))?;
        confusion.record(test.labels[t], predicted);
    }
    let (k, p) = match fitted.tuned_params() {
        Some((k, p)) => (Some(k), Some(p)),
        None => (None, None),
    };
    Ok(RunRecord {
        run_index,
        accuracy_pct: accuracy(&confusion)?,
        confusion,
        k,
        p,
    })
}

/// Stratified k-fold cross-validation of a pipeline.
pub fn kfold_cv_with<R: TaskRunner>(
    runner: &R,
    set: &EpochSet,
    spec: &PipelineSpec,
    folds: usize,
    seed: u64,
    opts: &ExperimentOptions,
) -> Result<EvalReport, EvalError> {
    spec.validate()?;
    let partition = stratified_kfold(&set.labels, folds, derive_stream(seed, 0))?;
    let all: Vec<usize> = (0..set.n_trials).collect();

    let task = |fold: usize| -> Result<RunRecord, EvalError> {
        let test_rows = &partition[fold];
        let train_rows: Vec<usize> = all
            .iter()
            .copied()
            .filter(|i| !test_rows.contains(i))
            .collect();
        run_split(
            set,
            spec,
            &train_rows,
            test_rows,
            fold,
            derive_stream(seed, 1 + fold as u64),
            opts,
        )
    };
    let runs: Result<Vec<RunRecord>, EvalError> = runner
        .run(folds, &task)
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| EvalError::InRun {
                run_index: i,
                source: alloc::boxed::Box::new(e),
            })
        })
        .collect();
    Ok(summarize(
        &set.subject_id,
        spec.method_name(),
        format!("cv{folds}"),
        runs?,
        ConfigEcho::from_spec(spec, seed, opts),
    ))
}

/// Sequential convenience wrapper.
pub fn kfold_cv(
    set: &EpochSet,
    spec: &PipelineSpec,
    folds: usize,
    seed: u64,
) -> Result<EvalReport, EvalError> {
    kfold_cv_with(&SequentialRunner, set, spec, folds, seed, &ExperimentOptions::default())
}

/// Small-training-set experiment: per fraction, draw a stratified training
/// subset `replicates` times and test on the remainder. One report per
/// fraction.
pub fn subsample_experiment_with<R: TaskRunner>(
    runner: &R,
    set: &EpochSet,
    spec: &PipelineSpec,
    fractions: &[Fraction],
    replicates: usize,
    seed: u64,
    opts: &ExperimentOptions,
) -> Result<Vec<EvalReport>, EvalError> {
    spec.validate()?;
    let mut reports = Vec::with_capacity(fractions.len());
    for (fi, fraction) in fractions.iter().enumerate() {
        // fail fast on infeasible fractions before spawning tasks
        stratified_draw(&set.labels, fraction.value(), 0)?;

        let task = |rep: usize| -> Result<RunRecord, EvalError> {
            let task_seed = derive_stream(seed, (fi * replicates + rep) as u64);
            let (train_rows, test_rows) =
                stratified_draw(&set.labels, fraction.value(), derive_stream(task_seed, 0))?;
            run_split(
                set,
                spec,
                &train_rows,
                &test_rows,
                rep,
                derive_stream(task_seed, 1),
                opts,
            )
        };
        let runs: Result<Vec<RunRecord>, EvalError> = runner
            .run(replicates, &task)
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                r.map_err(|e| EvalError::InRun {
                    run_index: i,
                    source: alloc::boxed::Box::new(e),
                })
            })
            .collect();
        reports.push(summarize(
            &set.subject_id,
            spec.method_name(),
            format!("{fraction}"),
            runs?,
            ConfigEcho::from_spec(spec, seed, opts),
        ));
    }
    Ok(reports)
}

/// Sequential convenience wrapper with the standard fractions.
pub fn subsample_experiment(
    set: &EpochSet,
    spec: &PipelineSpec,
    fractions: &[Fraction],
    replicates: usize,
    seed: u64,
) -> Result<Vec<EvalReport>, EvalError> {
    subsample_experiment_with(
        &SequentialRunner,
        set,
        spec,
        fractions,
        replicates,
        seed,
        &ExperimentOptions::default(),
    )
}

/// The standard subsampling fractions.
pub fn default_fractions() -> Vec<Fraction> {
    alloc::vec![
        Fraction::new(1, 2),
        Fraction::new(1, 3),
        Fraction::new(1, 6),
        Fraction::new(1, 12),
    ]
}

/// Two-decimal fixed-point with decimal round-half-up (84.595 -> "84.60").
///
/// Goes through a 4-decimal string so the rounding applies to the decimal
/// value, not to the binary approximation underneath it.
pub fn format_pct(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let negative = x < 0.0;
    let s = format!("{:.4}", if negative { -x } else { x });
    let digits: i64 = s
        .bytes()
        .filter(|b| b.is_ascii_digit())
        .fold(0i64, |acc, b| acc * 10 + (b - b'0') as i64);
    let rounded = (digits + 50) / 100;
    let sign = if negative && rounded != 0 { "-" } else { "" };
    format!("{sign}{}.{:02}", rounded / 100, rounded % 100)
}

fn csv_line(fields: &[String]) -> String {
    let mut line = fields.join(",");
    line.push_str("\r\n");
    line
}

/// Summary CSV: one row per (subject, method, split), mean and std.
pub fn render_summary_csv(reports: &[EvalReport]) -> String {
    let mut out = csv_line(&[
        String::from("subject"),
        String::from("method"),
        String::from("split"),
        String::from("mean"),
        String::from("std"),
    ]);
    for r in reports {
        out.push_str(&csv_line(&[
            r.subject.clone(),
            watermarked_method(r),
            r.split_label.clone(),
            format_pct(r.mean_pct),
            format_pct(r.std_pct),
        ]));
    }
    out
}

/// Per-run CSV: one row per fold or replicate.
pub fn render_runs_csv(reports: &[EvalReport]) -> String {
    let mut out = csv_line(&[
        String::from("subject"),
        String::from("method"),
        String::from("fraction"),
        String::from("run"),
        String::from("accuracy"),
        String::from("k"),
        String::from("p"),
        String::from("seed"),
    ]);
    for r in reports {
        for run in &r.runs {
            out.push_str(&csv_line(&[
                r.subject.clone(),
                watermarked_method(r),
                r.split_label.clone(),
                format!("{}", run.run_index),
                format_pct(run.accuracy_pct),
                run.k.map(|k| format!("{k}")).unwrap_or_default(),
                run.p.map(|p| format!("{p}")).unwrap_or_default(),
                format!("{}", r.config.seed),
            ]));
        }
    }
    out
}

fn watermarked_method(r: &EvalReport) -> String {
    if r.config.oracle_tuned {
        format!("{} [oracle-tuned]", r.method)
    } else {
        r.method.clone()
    }
}

/// Aligned text table of mean ± std per (subject, method, split).
pub fn render_text_table(reports: &[EvalReport]) -> String {
    let header = [
        String::from("subject"),
        String::from("method"),
        String::from("split"),
        String::from("accuracy"),
    ];
    let rows: Vec<[String; 4]> = reports
        .iter()
        .map(|r| {
            [
                r.subject.clone(),
                watermarked_method(r),
                r.split_label.clone(),
                format!("{} \u{00b1} {}", format_pct(r.mean_pct), format_pct(r.std_pct)),
            ]
        })
        .collect();
    let mut widths = [0usize; 4];
    for col in 0..4 {
        widths[col] = header[col].chars().count();
        for row in &rows {
            widths[col] = widths[col].max(row[col].chars().count());
        }
    }
    let render_row = |cells: &[String; 4]| -> String {
        let mut line = String::new();
        for col in 0..4 {
            if col > 0 {
                line.push_str("  ");
            }
            line.push_str(&cells[col]);
            for _ in cells[col].chars().count()..widths[col] {
                line.push(' ');
            }
        }
        while line.ends_with(' ') {
            line.pop();
        }
        line.push('\n');
        line
    };
    let mut out = render_row(&header);
    for row in &rows {
        out.push_str(&render_row(row));
    }
    out
}

/// Summary CSV and aligned text table.
pub fn render_tables(reports: &[EvalReport]) -> (String, String) {
    (render_summary_csv(reports), render_text_table(reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::sample_mixed_sources;

    fn counts(tp: usize, tn: usize, fp: usize, fn_: usize) -> ConfusionCounts {
        ConfusionCounts {
            true_pos: tp,
            true_neg: tn,
            false_pos: fp,
            false_neg: fn_,
        }
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&counts(40, 40, 10, 10)).unwrap(), 80.0);
        assert_eq!(accuracy(&counts(25, 0, 0, 0)).unwrap(), 100.0);
        assert_eq!(accuracy(&counts(0, 0, 5, 5)).unwrap(), 0.0);
        assert!(matches!(accuracy(&counts(0, 0, 0, 0)), Err(EvalError::ZeroTotal)));
    }

    fn contrast_set(trials_per_class: usize, seed: u64) -> EpochSet {
        let (set, _) = sample_mixed_sources(
            4,
            120,
            trials_per_class,
            &[10.0, 1.0, 1.0, 1.0],
            &[1.0, 10.0, 1.0, 1.0],
            seed,
        );
        set
    }

    #[test]
    fn separable_data_reaches_full_accuracy_with_spa() {
        let set = contrast_set(30, 1);
        let grid = HyperparamGrid {
            k_max_cap: 12,
            ..HyperparamGrid::default()
        };
        let spec = PipelineSpec::csp_spa(1, grid, TuneProtocol::InnerCv);
        let report = kfold_cv(&set, &spec, 5, 7).unwrap();
        assert_eq!(report.mean_pct, 100.0, "report {report:?}");
        assert_eq!(report.runs.len(), 5);
        assert!(report.runs.iter().all(|r| r.k.is_some() && r.p.is_some()));
    }

    #[test]
    fn null_data_sits_at_chance_level() {
        let mut means = Vec::new();
        for seed in 0..20 {
            // equal profiles: labels carry no information
            let (set, _) = sample_mixed_sources(3, 60, 12, &[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], 100 + seed);
            let spec = PipelineSpec::csp_lda(1, 0.0);
            let report = kfold_cv(&set, &spec, 4, seed).unwrap();
            means.push(report.mean_pct);
        }
        let grand = means.iter().sum::<f64>() / means.len() as f64;
        assert!((grand - 50.0).abs() < 10.0, "chance level {grand}");
    }

    #[test]
    fn reports_are_deterministic() {
        let set = contrast_set(20, 3);
        let spec = PipelineSpec::csp_lda(1, 0.0);
        let a = kfold_cv(&set, &spec, 5, 11).unwrap();
        let b = kfold_cv(&set, &spec, 5, 11).unwrap();
        assert_eq!(a, b);
        // seed is echoed, so reports with different seeds are distinct
        let c = kfold_cv(&set, &spec, 5, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn poison_check_passes_on_clean_pipelines() {
        let set = contrast_set(20, 5);
        for spec in [
            PipelineSpec::csp_lda(1, 0.0),
            PipelineSpec::mdrm(),
            PipelineSpec::ts_lda(0.05),
        ] {
            let opts = ExperimentOptions { poison_check: true };
            let report = kfold_cv_with(&SequentialRunner, &set, &spec, 4, 9, &opts).unwrap();
            // identical to the uninstrumented run
            let plain = kfold_cv(&set, &spec, 4, 9).unwrap();
            assert_eq!(report.runs, plain.runs);
        }
    }

    #[test]
    fn poison_check_catches_overlapping_split() {
        let set = contrast_set(20, 6);
        let spec = PipelineSpec::csp_lda(1, 0.0);
        let opts = ExperimentOptions { poison_check: true };
        // rows 0..30 train, 25..40 test: overlap 25..30 leaks test data
        let train: Vec<usize> = (0..30).collect();
        let test: Vec<usize> = (25..40).collect();
        match run_split(&set, &spec, &train, &test, 0, 1, &opts) {
            Err(EvalError::LeakageDetected { method }) => assert_eq!(method, "csp+lda"),
            other => panic!("expected leakage detection, got {other:?}"),
        }
    }

    #[test]
    fn oracle_protocol_is_watermarked() {
        let set = contrast_set(25, 8);
        let grid = HyperparamGrid {
            k_max_cap: 10,
            ..HyperparamGrid::default()
        };
        let spec = PipelineSpec::csp_spa(1, grid, TuneProtocol::OracleOnEval);
        let report = kfold_cv(&set, &spec, 5, 2).unwrap();
        assert!(report.config.oracle_tuned);
        let csv = render_summary_csv(&[report]);
        assert!(csv.contains("[oracle-tuned]"));
    }

    #[test]
    fn subsample_rejects_degenerate_fraction() {
        let set = contrast_set(12, 9);
        let spec = PipelineSpec::csp_lda(1, 0.0);
        let err = subsample_experiment(&set, &spec, &[Fraction::new(1, 1)], 3, 1);
        assert!(matches!(err, Err(EvalError::Split(SplitError::InfeasibleFraction { .. }))));
    }

    #[test]
    fn subsample_learning_curve_not_inverted() {
        let set = contrast_set(24, 10); // 48 trials
        let spec = PipelineSpec::csp_lda(1, 0.0);
        let reports = subsample_experiment(
            &set,
            &spec,
            &[Fraction::new(1, 2), Fraction::new(1, 6)],
            20,
            13,
        )
        .unwrap();
        assert_eq!(reports.len(), 2);
        assert_eq!(reports[0].split_label, "1/2");
        assert_eq!(reports[0].runs.len(), 20);
        assert!(
            reports[0].mean_pct >= reports[1].mean_pct,
            "1/2: {} < 1/6: {}",
            reports[0].mean_pct,
            reports[1].mean_pct
        );
    }

    #[test]
    fn subsample_deterministic() {
        let set = contrast_set(18, 11);
        let spec = PipelineSpec::csp_lda(1, 0.0);
        let a = subsample_experiment(&set, &spec, &[Fraction::new(1, 2)], 5, 3).unwrap();
        let b = subsample_experiment(&set, &spec, &[Fraction::new(1, 2)], 5, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mean_is_arithmetic_mean_of_runs() {
        let set = contrast_set(20, 12);
        let spec = PipelineSpec::csp_lda(1, 0.0);
        let report = kfold_cv(&set, &spec, 5, 4).unwrap();
        let mean = report.runs.iter().map(|r| r.accuracy_pct).sum::<f64>() / report.runs.len() as f64;
        assert!((report.mean_pct - mean).abs() < 1e-12);
    }

    #[test]
    fn incompatible_pipelines_rejected() {
        let bad = PipelineSpec {
            features: FeatureStage::Csp { pairs: 1 },
            classifier: ClassifierSpec::Mdrm,
        };
        assert!(matches!(
            bad.validate(),
            Err(EvalError::IncompatiblePipeline { .. })
        ));
        let bad = PipelineSpec {
            features: FeatureStage::SpdCovariance,
            classifier: ClassifierSpec::Lda { shrinkage: 0.0 },
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn method_names() {
        assert_eq!(PipelineSpec::csp_lda(3, 0.0).method_name(), "csp+lda");
        assert_eq!(PipelineSpec::mdrm().method_name(), "mdrm");
        assert_eq!(PipelineSpec::ts_lda(0.05).method_name(), "ts+lda");
        assert_eq!(
            PipelineSpec::csp_spa(3, HyperparamGrid::default(), TuneProtocol::InnerCv).method_name(),
            "csp+spa"
        );
    }

    #[test]
    fn pct_formatting_rounds_half_up() {
        assert_eq!(format_pct(84.595), "84.60");
        assert_eq!(format_pct(84.594), "84.59");
        assert_eq!(format_pct(100.0), "100.00");
        assert_eq!(format_pct(0.0), "0.00");
        assert_eq!(format_pct(79.0499), "79.05");
        assert_eq!(format_pct(12.345), "12.35");
    }

    #[test]
    fn empty_report_list_gives_header_only_csv() {
        let csv = render_summary_csv(&[]);
        assert_eq!(csv, "subject,method,split,mean,std\r\n");
    }

    #[test]
    fn two_methods_give_two_rows() {
        let set = contrast_set(20, 14);
        let reports = [
            kfold_cv(&set, &PipelineSpec::csp_lda(1, 0.0), 5, 4).unwrap(),
            kfold_cv(&set, &PipelineSpec::mdrm(), 5, 4).unwrap(),
        ];
        let csv = render_summary_csv(&reports);
        assert_eq!(csv.lines().count(), 3);
        let (summary, table) = render_tables(&reports);
        assert_eq!(summary, csv);
        assert_eq!(table.lines().count(), 3);
        let runs = render_runs_csv(&reports);
        assert_eq!(runs.lines().count(), 1 + 10);
    }
}
