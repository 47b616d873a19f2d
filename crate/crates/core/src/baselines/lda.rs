//! Two-class linear discriminant analysis with optional covariance
//! shrinkage toward a scaled identity.

use alloc::vec;
use alloc::vec::Vec;

use crate::csp::FeatureMatrix;
use crate::epochs::{Label, LABEL_CLASS1, LABEL_CLASS2};
use crate::linalg::{dot, solve_linear, LinalgError, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub enum LdaError {
    MissingClass { label: Label },
    /// Pooled covariance not invertible; raise the shrinkage.
    SingularCovariance { shrinkage: f64 },
    BadShrinkage { shrinkage: f64 },
    DimensionMismatch { expected: usize, got: usize },
    Linalg(LinalgError),
}

impl core::fmt::Display for LdaError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LdaError::MissingClass { label } => write!(f, "no training rows of class {label}"),
            LdaError::SingularCovariance { shrinkage } => write!(
                f,
                "pooled covariance is singular at shrinkage {shrinkage}; use a shrinkage > 0"
            ),
            LdaError::BadShrinkage { shrinkage } => {
                write!(f, "shrinkage must lie in [0, 1], got {shrinkage}")
            }
            LdaError::DimensionMismatch { expected, got } => {
                write!(f, "feature dimension mismatch: expected {expected}, got {got}")
            }
            LdaError::Linalg(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for LdaError {}

/// Linear decision rule: class 1 iff `w·x - bias > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LdaModel {
    pub fn params_finite(&self) -> bool {
        self.bias.is_finite() && self.weights.iter().all(|w| w.is_finite())
    }
}

fn class_mean(fm: &FeatureMatrix, label: Label) -> Result<Vec<f64>, LdaError> {
    let rows: Vec<usize> = (0..fm.n).filter(|&i| fm.labels[i] == label).collect();
    if rows.is_empty() {
        return Err(LdaError::MissingClass { label });
    }
    let mut mean = vec![0.0; fm.d];
    for &i in &rows {
        for (m, &v) in mean.iter_mut().zip(fm.row(i)) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= rows.len() as f64;
    }
    Ok(mean)
}

/// Fit LDA with pooled within-class covariance, shrunk toward
/// `(trace/d)·I` by `shrinkage` ∈ [0, 1]. The decision threshold sits at
/// the midpoint between the class means.
pub fn lda_fit(fm: &FeatureMatrix, shrinkage: f64) -> Result<LdaModel, LdaError> {
    if !(0.0..=1.0).contains(&shrinkage) {
        return Err(LdaError::BadShrinkage { shrinkage });
    }
    let mean1 = class_mean(fm, LABEL_CLASS1)?;
    let mean2 = class_mean(fm, LABEL_CLASS2)?;

    let d = fm.d;
    let mut pooled = Matrix::zeros(d, d);
    let mut weight = 0usize;
    for label in [LABEL_CLASS1, LABEL_CLASS2] {
        let mean = if label == LABEL_CLASS1 { &mean1 } else { &mean2 };
        let rows: Vec<usize> = (0..fm.n).filter(|&i| fm.labels[i] == label).collect();
        for &i in &rows {
            let row = fm.row(i);
            for a in 0..d {
                let da = row[a] - mean[a];
                for b in a..d {
                    let v = pooled.get(a, b) + da * (row[b] - mean[b]);
                    pooled.set(a, b, v);
                    pooled.set(b, a, v);
                }
            }
        }
        weight += rows.len().saturating_sub(1);
    }
    if weight == 0 {
        return Err(LdaError::SingularCovariance { shrinkage });
    }
    pooled = pooled.scale(1.0 / weight as f64);

    if shrinkage > 0.0 {
        let target = pooled.trace() / d as f64;
        pooled = pooled.scale(1.0 - shrinkage);
        for i in 0..d {
            pooled.set(i, i, pooled.get(i, i) + shrinkage * target);
        }
    }

    let diff: Vec<f64> = mean1.iter().zip(&mean2).map(|(a, b)| a - b).collect();
    let weights = solve_linear(&pooled, &diff).map_err(|e| match e {
        LinalgError::IllConditioned { .. } => LdaError::SingularCovariance { shrinkage },
        other => LdaError::Linalg(other),
    })?;
    let midpoint: Vec<f64> = mean1.iter().zip(&mean2).map(|(a, b)| 0.5 * (a + b)).collect();
    let bias = dot(&weights, &midpoint);
    Ok(LdaModel { weights, bias })
}

pub fn lda_predict(model: &LdaModel, x: &[f64]) -> Label {
    debug_assert_eq!(model.weights.len(), x.len());
    if dot(&model.weights, x) - model.bias > 0.0 {
        LABEL_CLASS1
    } else {
        LABEL_CLASS2
    }
}
