//! Common Spatial Pattern training and log-variance feature extraction.
//!
//! CSP jointly diagonalizes the two class-mean covariance matrices: whiten
//! their sum, decompose the whitened class-1 covariance, and keep the
//! filters at both spectral extremes. Projected row variances, log-scaled
//! and normalized, form the classifier features.

use alloc::vec::Vec;

use crate::epochs::{EpochSet, Label, LABEL_CLASS1, LABEL_CLASS2};
use crate::linalg::{sym_eig, LinalgError, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub enum CspError {
    /// Trial with zero (or non-finite) total power.
    DegenerateTrial,
    /// Covariance needs more samples than channels.
    TooFewSamples { channels: usize, samples: usize },
    MissingClass { label: Label },
    TooFewTrials { label: Label, count: usize },
    /// Requested 2m filters exceed the channel count.
    TooManyPairs { pairs: usize, channels: usize },
    ChannelMismatch { expected: usize, got: usize },
    Linalg(LinalgError),
}

impl core::fmt::Display for CspError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CspError::DegenerateTrial => write!(f, "degenerate trial: zero total variance"),
            CspError::TooFewSamples { channels, samples } => {
                write!(f, "trial has {samples} samples for {channels} channels; need samples > channels")
            }
            CspError::MissingClass { label } => write!(f, "no trials of class {label}"),
            CspError::TooFewTrials { label, count } => {
                write!(f, "class {label} has {count} trials, need at least 2")
            }
            CspError::TooManyPairs { pairs, channels } => {
                write!(f, "{pairs} filter pairs need {} rows but only {channels} channels exist", 2 * pairs)
            }
            CspError::ChannelMismatch { expected, got } => {
                write!(f, "trial has {got} channels, model expects {expected}")
            }
            CspError::Linalg(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for CspError {}

impl From<LinalgError> for CspError {
    fn from(e: LinalgError) -> Self {
        CspError::Linalg(e)
    }
}

/// Trained spatial filter bank.
#[derive(Debug, Clone, PartialEq)]
pub struct CspModel {
    /// Full N×N projection; rows are spatial filters.
    pub w_full: Matrix,
    /// The 2m retained row indices: first m and last m.
    pub selected_rows: Vec<usize>,
    pub m: usize,
    pub n_channels: usize,
}

impl CspModel {
    pub fn feature_dim(&self) -> usize {
        self.selected_rows.len()
    }

    pub fn is_finite(&self) -> bool {
        self.w_full.is_finite()
    }
}

/// Feature rows with one class label each.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub n: usize,
    pub d: usize,
    /// Row-major n×d values.
    pub values: Vec<f64>,
    pub labels: Vec<Label>,
}

impl FeatureMatrix {
    pub fn new(n: usize, d: usize, values: Vec<f64>, labels: Vec<Label>) -> Self {
        assert_eq!(values.len(), n * d, "values length must equal n*d");
        assert_eq!(labels.len(), n, "one label per row");
        Self { n, d, values, labels }
    }

    pub fn empty(d: usize) -> Self {
        Self {
            n: 0,
            d,
            values: Vec::new(),
            labels: Vec::new(),
        }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn push_row(&mut self, row: &[f64], label: Label) {
        assert_eq!(row.len(), self.d);
        self.values.extend_from_slice(row);
        self.labels.push(label);
        self.n += 1;
    }

    pub fn class_count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn min_class_count(&self) -> usize {
        self.class_count(LABEL_CLASS1).min(self.class_count(LABEL_CLASS2))
    }

    /// New matrix containing the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let mut out = FeatureMatrix::empty(self.d);
        for &i in indices {
            out.push_row(self.row(i), self.labels[i]);
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Trace-normalized spatial covariance of one trial: (XXᵀ)/trace(XXᵀ).
pub fn normalized_covariance(trial: &Matrix) -> Result<Matrix, CspError> {
    let (channels, samples) = (trial.rows(), trial.cols());
    if samples <= channels {
        return Err(CspError::TooFewSamples { channels, samples });
    }
    let mut cov = Matrix::zeros(channels, channels);
    for i in 0..channels {
        let ri = trial.row(i);
        for j in i..channels {
            let v = crate::linalg::dot(ri, trial.row(j));
            cov.set(i, j, v);
            cov.set(j, i, v);
        }
    }
    let trace = cov.trace();
    if !(trace > 0.0) || !trace.is_finite() {
        return Err(CspError::DegenerateTrial);
    }
    Ok(cov.scale(1.0 / trace))
}

fn class_mean_covariance(train: &EpochSet, label: Label) -> Result<Matrix, CspError> {
    let indices: Vec<usize> = (0..train.n_trials)
        .filter(|&t| train.labels[t] == label)
        .collect();
    if indices.is_empty() {
        return Err(CspError::MissingClass { label });
    }
    if indices.len() < 2 {
        return Err(CspError::TooFewTrials {
            label,
            count: indices.len(),
        });
    }
    let mut mean = Matrix::zeros(train.n_channels, train.n_channels);
    for &t in &indices {
        mean = mean.add(&normalized_covariance(&train.trial_matrix(t))?);
    }
    Ok(mean.scale(1.0 / indices.len() as f64))
}

/// Relative eigenvalue floor for the composite-covariance whitening.
const WHITEN_EIG_FLOOR: f64 = 1e-10;

/// Fit CSP on a two-class training set, keeping `m` filter pairs.
///
/// Class-mean covariances are plain arithmetic means of the per-trial
/// normalized covariances, so the composite is their unweighted sum;
/// trial counts do not weight the classes.
pub fn fit_csp(train: &EpochSet, m: usize) -> Result<CspModel, CspError> {
    let n = train.n_channels;
    if 2 * m > n || m == 0 {
        return Err(CspError::TooManyPairs { pairs: m, channels: n });
    }
    let r1 = class_mean_covariance(train, LABEL_CLASS1)?;
    let r2 = class_mean_covariance(train, LABEL_CLASS2)?;
    let composite = r1.add(&r2);

    let eig = sym_eig(&composite)?;
    let max = eig.values[0];
    if !(max > 0.0) {
        return Err(CspError::Linalg(LinalgError::SingularEigenvalue { eigenvalue: max }));
    }
    // Rank deficiency after band-pass filtering shows up as tiny eigenvalues;
    // clip them instead of letting the whitening blow up.
    let floor = WHITEN_EIG_FLOOR * max;
    let mut whiten = Matrix::zeros(n, n); // P = Λ^(-1/2) Uᵀ
    for k in 0..n {
        let lambda = eig.values[k].max(floor);
        let scale = 1.0 / libm::sqrt(lambda);
        for j in 0..n {
            whiten.set(k, j, scale * eig.vectors.get(j, k));
        }
    }

    let s1 = whiten.matmul(&r1).matmul(&whiten.transpose()).symmetrized();
    let eig1 = sym_eig(&s1)?;
    // W = Bᵀ P with B's columns ordered by descending whitened class-1 power
    let w_full = eig1.vectors.transpose().matmul(&whiten);

    let mut selected_rows: Vec<usize> = (0..m).collect();
    selected_rows.extend(n - m..n);

    Ok(CspModel {
        w_full,
        selected_rows,
        m,
        n_channels: n,
    })
}

/// Whitened class-1 eigenvalues of a fitted model against a training set.
/// Complementarity (λ1 + λ2 = 1) makes the class-2 spectrum implicit.
pub fn whitened_class_eigenvalues(model: &CspModel, train: &EpochSet) -> Result<Vec<f64>, CspError> {
    let r1 = class_mean_covariance(train, LABEL_CLASS1)?;
    let projected = model.w_full.matmul(&r1).matmul(&model.w_full.transpose());
    Ok((0..model.n_channels).map(|i| projected.get(i, i)).collect())
}

fn row_variance(row: &[f64]) -> f64 {
    let n = row.len() as f64;
    let mean = row.iter().sum::<f64>() / n;
    row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Log-variance feature vector of one trial (length 2m).
pub fn csp_features(model: &CspModel, trial: &Matrix) -> Result<Vec<f64>, CspError> {
    if trial.rows() != model.n_channels {
        return Err(CspError::ChannelMismatch {
            expected: model.n_channels,
            got: trial.rows(),
        });
    }
    let variances: Vec<f64> = model
        .selected_rows
        .iter()
        .map(|&r| {
            let filter = model.w_full.row(r);
            let projected = trial.transpose().matvec(filter);
            row_variance(&projected)
        })
        .collect();
    let total: f64 = variances.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(CspError::DegenerateTrial);
    }
    Ok(variances.iter().map(|v| libm::log(v / total)).collect())
}

/// Features for every trial of a set; labels carried through.
pub fn transform_set(model: &CspModel, e: &EpochSet) -> Result<FeatureMatrix, CspError> {
    let mut out = FeatureMatrix::empty(model.feature_dim());
    for t in 0..e.n_trials {
        let f = csp_features(model, &e.trial_matrix(t))?;
        out.push_row(&f, e.labels[t]);
    }
    Ok(out)
}
