//! Affine-invariant geometry of SPD matrices: geodesic distance, Karcher
//! mean, minimum-distance-to-mean classification, and tangent-space
//! vectorization.

use alloc::vec::Vec;

use crate::epochs::{Label, LABEL_CLASS1, LABEL_CLASS2};
use crate::linalg::{
    generalized_eigvals, spd_exp, spd_inv_sqrt, spd_log, spd_sqrt, LinalgError, Matrix,
};

#[derive(Debug, Clone, PartialEq)]
pub enum RiemannError {
    EmptySet,
    MissingClass { label: Label },
    /// Karcher iteration did not reach tolerance; carries the last residual.
    NoConvergence { residual: f64 },
    SizeMismatch { expected: usize, got: usize },
    Linalg(LinalgError),
}

impl core::fmt::Display for RiemannError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RiemannError::EmptySet => write!(f, "cannot average an empty set of matrices"),
            RiemannError::MissingClass { label } => write!(f, "no covariances of class {label}"),
            RiemannError::NoConvergence { residual } => {
                write!(f, "Karcher mean did not converge (residual {residual:e})")
            }
            RiemannError::SizeMismatch { expected, got } => {
                write!(f, "matrix size mismatch: expected {expected}, got {got}")
            }
            RiemannError::Linalg(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for RiemannError {}

impl From<LinalgError> for RiemannError {
    fn from(e: LinalgError) -> Self {
        RiemannError::Linalg(e)
    }
}

/// Affine-invariant geodesic distance δ(a, b) = sqrt(Σ log² λᵢ) with λᵢ the
/// generalized eigenvalues of (a, b).
pub fn riemannian_distance(a: &Matrix, b: &Matrix) -> Result<f64, RiemannError> {
    let eigvals = generalized_eigvals(a, b)?;
    let sum: f64 = eigvals
        .iter()
        .map(|&l| {
            let x = libm::log(l);
            x * x
        })
        .sum();
    Ok(libm::sqrt(sum))
}

pub const KARCHER_TOL: f64 = 1e-9;
pub const KARCHER_MAX_ITER: usize = 50;

/// Karcher (Fréchet) mean under the affine-invariant metric.
///
/// Iterates `G ← G^{1/2}·exp(τ·mean log(G^{-1/2}·Cᵢ·G^{-1/2}))·G^{1/2}`
/// from the arithmetic mean until the tangent-space residual drops below
/// `tol`. The unit-step fixed point can oscillate when the inputs spread
/// far apart on the manifold, so the step τ shrinks whenever the residual
/// stops decreasing.
pub fn riemannian_mean(
    mats: &[Matrix],
    tol: f64,
    max_iter: usize,
) -> Result<Matrix, RiemannError> {
    if mats.is_empty() {
        return Err(RiemannError::EmptySet);
    }
    let n = mats[0].rows();
    for m in mats {
        if m.rows() != n || m.cols() != n {
            return Err(RiemannError::SizeMismatch {
                expected: n,
                got: m.rows(),
            });
        }
    }

    let mut mean = Matrix::zeros(n, n);
    for m in mats {
        mean = mean.add(m);
    }
    let mut g = mean.scale(1.0 / mats.len() as f64);

    let mut residual = f64::INFINITY;
    let mut step: f64 = 1.0;
    let mut prev_residual = f64::INFINITY;
    for _ in 0..max_iter {
        let g_inv_sqrt = spd_inv_sqrt(&g)?;
        let mut tangent = Matrix::zeros(n, n);
        for m in mats {
            let whitened = g_inv_sqrt.matmul(m).matmul(&g_inv_sqrt).symmetrized();
            tangent = tangent.add(&spd_log(&whitened)?);
        }
        tangent = tangent.scale(1.0 / mats.len() as f64);
        residual = tangent.frobenius_norm();
        if residual <= tol {
            return Ok(g);
        }
        if residual < prev_residual {
            step = (step * 1.1).min(1.0);
        } else {
            step *= 0.5;
        }
        prev_residual = residual;
        let g_sqrt = spd_sqrt(&g)?;
        g = g_sqrt
            .matmul(&spd_exp(&tangent.scale(step))?)
            .matmul(&g_sqrt)
            .symmetrized();
    }
    Err(RiemannError::NoConvergence { residual })
}

/// Per-class Riemannian means for minimum-distance classification.
#[derive(Debug, Clone)]
pub struct MdrmModel {
    pub mean_class1: Matrix,
    pub mean_class2: Matrix,
    pub n_channels: usize,
}

impl MdrmModel {
    pub fn params_finite(&self) -> bool {
        self.mean_class1.is_finite() && self.mean_class2.is_finite()
    }
}

pub fn mdrm_fit(covs: &[Matrix], labels: &[Label]) -> Result<MdrmModel, RiemannError> {
    assert_eq!(covs.len(), labels.len(), "one label per covariance");
    let mut means = Vec::with_capacity(2);
    for label in [LABEL_CLASS1, LABEL_CLASS2] {
        let class: Vec<Matrix> = covs
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == label)
            .map(|(c, _)| c.clone())
            .collect();
        if class.is_empty() {
            return Err(RiemannError::MissingClass { label });
        }
        means.push(riemannian_mean(&class, KARCHER_TOL, KARCHER_MAX_ITER)?);
    }
    let mean_class2 = means.pop().unwrap();
    let mean_class1 = means.pop().unwrap();
    let n_channels = mean_class1.rows();
    Ok(MdrmModel {
        mean_class1,
        mean_class2,
        n_channels,
    })
}

/// Assign the class whose Riemannian mean is nearest; ties go to class 1.
pub fn mdrm_predict(model: &MdrmModel, cov: &Matrix) -> Result<Label, RiemannError> {
    let d1 = riemannian_distance(cov, &model.mean_class1)?;
    let d2 = riemannian_distance(cov, &model.mean_class2)?;
    Ok(if d1 <= d2 { LABEL_CLASS1 } else { LABEL_CLASS2 })
}

/// Tangent-space lift at a reference point: SPD matrices become
/// `n(n+1)/2`-dimensional Euclidean vectors whose norm equals the geodesic
/// distance to the reference.
#[derive(Debug, Clone)]
pub struct TangentSpaceMap {
    pub reference: Matrix,
    inv_sqrt_ref: Matrix,
}

impl TangentSpaceMap {
    pub fn new(reference: Matrix) -> Result<Self, RiemannError> {
        let inv_sqrt_ref = spd_inv_sqrt(&reference)?;
        Ok(Self {
            reference,
            inv_sqrt_ref,
        })
    }

    /// Vector dimension n(n+1)/2.
    pub fn dim(&self) -> usize {
        let n = self.reference.rows();
        n * (n + 1) / 2
    }

    /// Upper-triangular half-vectorization of `log(ref^{-1/2}·cov·ref^{-1/2})`
    /// with off-diagonal entries weighted by √2.
    pub fn tangent_map(&self, cov: &Matrix) -> Result<Vec<f64>, RiemannError> {
        let n = self.reference.rows();
        if cov.rows() != n || cov.cols() != n {
            return Err(RiemannError::SizeMismatch {
                expected: n,
                got: cov.rows(),
            });
        }
        let whitened = self
            .inv_sqrt_ref
            .matmul(cov)
            .matmul(&self.inv_sqrt_ref)
            .symmetrized();
        let log = spd_log(&whitened)?;
        let sqrt2 = libm::sqrt(2.0);
        let mut out = Vec::with_capacity(self.dim());
        for i in 0..n {
            for j in i..n {
                if i == j {
                    out.push(log.get(i, i));
                } else {
                    out.push(sqrt2 * log.get(i, j));
                }
            }
        }
        Ok(out)
    }

    pub fn params_finite(&self) -> bool {
        self.reference.is_finite() && self.inv_sqrt_ref.is_finite()
    }
}
