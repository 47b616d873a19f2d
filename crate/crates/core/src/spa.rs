//! Spherical local manifold approximation: SPCA sphere fitting and the SPA
//! classifier built on it.
//!
//! SPCA fits a p-dimensional sphere to a point cloud in three steps: take
//! the top p+1 principal directions, project the points into that affine
//! subspace, and solve the algebraic least-squares sphere fit in the local
//! coordinates. The SPA classifier fits one such sphere per class to the
//! k nearest in-class neighbors of a query point and assigns the class
//! whose sphere is nearest.
//!
//! The center solve uses the `+1/2` normal-equation form
//! `c = 1/2 · S⁻¹ · Σ(‖ξᵢ‖² − mean)(ξᵢ − ξ̄)` obtained by eliminating the
//! radius from the algebraic objective; unit tests pin it against a
//! brute-force grid minimizer.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::csp::FeatureMatrix;
use crate::epochs::{Label, LABEL_CLASS1, LABEL_CLASS2};
use crate::linalg::{distance, dot, norm, solve_linear, sym_eig, LinalgError, Matrix};
use crate::split::{stratified_kfold, SplitError};

#[derive(Debug, Clone, PartialEq)]
pub enum SpaError {
    /// A p-sphere fit needs at least p+2 points.
    InsufficientNeighbors { needed: usize, got: usize },
    /// p+1 basis directions cannot exceed the ambient dimension.
    DimensionTooHigh { p: usize, ambient: usize },
    /// Projected points do not determine a sphere (coincident or collinear).
    DegenerateFit,
    ClassTooSmall { label: Label, count: usize, k: usize },
    /// A per-class sphere fit failed inside prediction.
    ClassFit { label: Label, source: Box<SpaError> },
    /// No (k, p) cell satisfies k >= p+2 after clamping.
    InfeasibleGrid,
    /// Oracle tuning requested without an evaluation set.
    MissingEvalSet,
    DimensionMismatch { expected: usize, got: usize },
    Split(SplitError),
    Linalg(LinalgError),
}

impl core::fmt::Display for SpaError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SpaError::InsufficientNeighbors { needed, got } => {
                write!(f, "sphere fit needs at least {needed} points, got {got}")
            }
            SpaError::DimensionTooHigh { p, ambient } => {
                write!(f, "manifold dimension {p} too high for ambient dimension {ambient}")
            }
            SpaError::DegenerateFit => write!(f, "degenerate sphere fit: singular local scatter"),
            SpaError::ClassTooSmall { label, count, k } => {
                write!(f, "class {label} has {count} members, fewer than k = {k}")
            }
            SpaError::ClassFit { label, source } => {
                write!(f, "sphere fit for class {label} failed: {source}")
            }
            SpaError::InfeasibleGrid => write!(f, "hyperparameter grid has no feasible (k, p) cell"),
            SpaError::MissingEvalSet => write!(f, "oracle tuning requires an evaluation set"),
            SpaError::DimensionMismatch { expected, got } => {
                write!(f, "feature dimension mismatch: expected {expected}, got {got}")
            }
            SpaError::Split(e) => write!(f, "{e}"),
            SpaError::Linalg(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SpaError {}

impl From<LinalgError> for SpaError {
    fn from(e: LinalgError) -> Self {
        SpaError::Linalg(e)
    }
}

impl From<SplitError> for SpaError {
    fn from(e: SplitError) -> Self {
        SpaError::Split(e)
    }
}

/// A p-dimensional sphere inside an affine subspace of R^D.
#[derive(Debug, Clone)]
pub struct Sphere {
    /// D×(p+1) orthonormal basis of the fitted subspace.
    pub basis_v: Matrix,
    pub center_c: Vec<f64>,
    pub radius_r: f64,
    pub p: usize,
}

const PROJECTION_FLOOR: f64 = 1e-12;

impl Sphere {
    /// Component of `x - c` inside the sphere's subspace, as ambient vector.
    fn in_plane_offset(&self, x: &[f64]) -> Vec<f64> {
        let d = self.center_c.len();
        let cols = self.basis_v.cols();
        let mut local = Vec::with_capacity(cols);
        for j in 0..cols {
            let mut t = 0.0;
            for i in 0..d {
                t += self.basis_v.get(i, j) * (x[i] - self.center_c[i]);
            }
            local.push(t);
        }
        let mut w = alloc::vec![0.0; d];
        for j in 0..cols {
            for i in 0..d {
                w[i] += self.basis_v.get(i, j) * local[j];
            }
        }
        w
    }
}

/// Fit a p-sphere to the rows of `points` (n×D).
pub fn spca_fit(points: &Matrix, p: usize) -> Result<Sphere, SpaError> {
    let n = points.rows();
    let d = points.cols();
    if n < p + 2 {
        return Err(SpaError::InsufficientNeighbors { needed: p + 2, got: n });
    }
    if p + 1 > d {
        return Err(SpaError::DimensionTooHigh { p, ambient: d });
    }

    let mut mean = alloc::vec![0.0; d];
    for i in 0..n {
        for (m, &v) in mean.iter_mut().zip(points.row(i)) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }

    let mut cov = Matrix::zeros(d, d);
    for i in 0..n {
        let row = points.row(i);
        for a in 0..d {
            let da = row[a] - mean[a];
            for b in a..d {
                let v = cov.get(a, b) + da * (row[b] - mean[b]);
                cov.set(a, b, v);
                cov.set(b, a, v);
            }
        }
    }
    cov = cov.scale(1.0 / n as f64);

    let eig = sym_eig(&cov)?;
    let basis_v = Matrix::from_fn(d, p + 1, |i, j| eig.vectors.get(i, j));

    // local coordinates of each point in the principal subspace
    let mut local: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let row = points.row(i);
        let mut u = Vec::with_capacity(p + 1);
        for j in 0..p + 1 {
            let mut t = 0.0;
            for a in 0..d {
                t += basis_v.get(a, j) * (row[a] - mean[a]);
            }
            u.push(t);
        }
        local.push(u);
    }

    let dim = p + 1;
    let mut u_mean = alloc::vec![0.0; dim];
    let mut beta_mean = 0.0;
    for u in &local {
        for (m, &v) in u_mean.iter_mut().zip(u) {
            *m += v;
        }
        beta_mean += dot(u, u);
    }
    for m in u_mean.iter_mut() {
        *m /= n as f64;
    }
    beta_mean /= n as f64;

    let mut scatter = Matrix::zeros(dim, dim);
    let mut rhs = alloc::vec![0.0; dim];
    for u in &local {
        let centered: Vec<f64> = u.iter().zip(&u_mean).map(|(a, b)| a - b).collect();
        let beta = dot(u, u) - beta_mean;
        for a in 0..dim {
            rhs[a] += 0.5 * beta * centered[a];
            for b in a..dim {
                let v = scatter.get(a, b) + centered[a] * centered[b];
                scatter.set(a, b, v);
                scatter.set(b, a, v);
            }
        }
    }

    let c_local = solve_linear(&scatter, &rhs).map_err(|e| match e {
        LinalgError::IllConditioned { .. } | LinalgError::SingularEigenvalue { .. } => {
            SpaError::DegenerateFit
        }
        other => SpaError::Linalg(other),
    })?;

    let radius_r = local.iter().map(|u| distance(u, &c_local)).sum::<f64>() / n as f64;
    if !(radius_r > 0.0) || !radius_r.is_finite() {
        return Err(SpaError::DegenerateFit);
    }

    let mut center_c = mean;
    for j in 0..dim {
        for i in 0..d {
            center_c[i] += basis_v.get(i, j) * c_local[j];
        }
    }

    Ok(Sphere {
        basis_v,
        center_c,
        radius_r,
        p,
    })
}

/// The k rows of class `label` nearest to `x` (Euclidean). Distance ties
/// are broken by training-row index for determinism.
pub fn knn_in_class(
    fm: &FeatureMatrix,
    x: &[f64],
    label: Label,
    k: usize,
) -> Result<Matrix, SpaError> {
    if x.len() != fm.d {
        return Err(SpaError::DimensionMismatch {
            expected: fm.d,
            got: x.len(),
        });
    }
    let mut candidates: Vec<(f64, usize)> = fm
        .labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == label)
        .map(|(i, _)| {
            let row = fm.row(i);
            let d2: f64 = row.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            (d2, i)
        })
        .collect();
    if candidates.len() < k {
        return Err(SpaError::ClassTooSmall {
            label,
            count: candidates.len(),
            k,
        });
    }
    candidates.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    let mut out = Matrix::zeros(k, fm.d);
    for (row, &(_, idx)) in candidates.iter().take(k).enumerate() {
        for (col, &v) in fm.row(idx).iter().enumerate() {
            out.set(row, col, v);
        }
    }
    Ok(out)
}

/// Radial projection of `x` onto the sphere. When `x - c` has no component
/// in the sphere's subspace the projection is undefined; the deterministic
/// fallback is `c + r·v₁`.
pub fn project_to_sphere(s: &Sphere, x: &[f64]) -> Vec<f64> {
    let w = s.in_plane_offset(x);
    let len = norm(&w);
    let d = s.center_c.len();
    if len < PROJECTION_FLOOR {
        let mut out = s.center_c.clone();
        for i in 0..d {
            out[i] += s.radius_r * s.basis_v.get(i, 0);
        }
        return out;
    }
    let scale = s.radius_r / len;
    s.center_c
        .iter()
        .zip(&w)
        .map(|(c, wi)| c + scale * wi)
        .collect()
}

/// Euclidean distance from `x` to its projection on the sphere.
pub fn spa_distance(s: &Sphere, x: &[f64]) -> f64 {
    distance(x, &project_to_sphere(s, x))
}

/// Stored training features plus the tuned neighborhood size and manifold
/// dimension.
#[derive(Debug, Clone)]
pub struct SpaModel {
    pub train: FeatureMatrix,
    pub k: usize,
    pub p: usize,
}

impl SpaModel {
    /// Build a model. `k` is clamped to the smaller class count (small
    /// cross-validation folds would otherwise abort mid-experiment); the
    /// clamped value must still allow a p-sphere fit.
    pub fn new(train: FeatureMatrix, k: usize, p: usize) -> Result<Self, SpaError> {
        if p + 1 > train.d {
            return Err(SpaError::DimensionTooHigh { p, ambient: train.d });
        }
        let min_class = train.min_class_count();
        let k = k.min(min_class);
        if k < p + 2 {
            return Err(SpaError::InsufficientNeighbors { needed: p + 2, got: k });
        }
        Ok(Self { train, k, p })
    }

    pub fn params_finite(&self) -> bool {
        self.train.all_finite()
    }
}

/// Per-class sphere distances for a query point.
pub fn spa_predict_detailed(model: &SpaModel, x: &[f64]) -> Result<(Label, f64, f64), SpaError> {
    let mut dists = [0.0f64; 2];
    for (slot, label) in [LABEL_CLASS1, LABEL_CLASS2].into_iter().enumerate() {
        let neighbors = knn_in_class(&model.train, x, label, model.k)?;
        let sphere = spca_fit(&neighbors, model.p).map_err(|e| SpaError::ClassFit {
            label,
            source: Box::new(e),
        })?;
        dists[slot] = spa_distance(&sphere, x);
    }
    // ties go to the smaller label
    let label = if dists[0] <= dists[1] { LABEL_CLASS1 } else { LABEL_CLASS2 };
    Ok((label, dists[0], dists[1]))
}

pub fn spa_predict(model: &SpaModel, x: &[f64]) -> Result<Label, SpaError> {
    spa_predict_detailed(model, x).map(|(label, _, _)| label)
}

/// Hyperparameter search space. The concrete k range of a training set is
/// `k_min ..= min(smallest class count, k_max_cap)`, clamped so the grid
/// stays nonempty when classes are small.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperparamGrid {
    pub p_values: Vec<usize>,
    pub k_min: usize,
    pub k_step: usize,
    pub k_max_cap: usize,
}

impl Default for HyperparamGrid {
    fn default() -> Self {
        Self {
            p_values: alloc::vec![1, 2, 3, 4],
            k_min: 8,
            k_step: 1,
            k_max_cap: 46,
        }
    }
}

impl HyperparamGrid {
    /// Feasible (k, p) cells for a training set, in deterministic order
    /// (p ascending, then k ascending). Cells with k < p+2, or with p+1
    /// beyond the feature dimension, are skipped.
    pub fn cells(&self, min_class_count: usize, feature_dim: usize) -> Vec<(usize, usize)> {
        let k_max = self.k_max_cap.min(min_class_count);
        let k_min = self.k_min.min(k_max);
        let mut cells = Vec::new();
        for &p in &self.p_values {
            if p + 1 > feature_dim {
                continue;
            }
            let mut k = k_min;
            while k <= k_max {
                if k >= p + 2 {
                    cells.push((k, p));
                }
                k += self.k_step.max(1);
            }
        }
        cells
    }
}

/// How (k, p) are selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TuneProtocol {
    /// 5-fold stratified cross-validation on the training features only.
    InnerCv,
    /// Score each cell directly on a provided evaluation set. Reports using
    /// this protocol are watermarked: the selection has seen the test data.
    OracleOnEval,
}

#[derive(Debug, Clone)]
pub struct TuneResult {
    pub k: usize,
    pub p: usize,
    /// (k, p, score) for every scored cell, in grid order.
    pub table: Vec<(usize, usize, f64)>,
    pub oracle_tuned: bool,
}

fn fraction_correct(model: &SpaModel, eval: &FeatureMatrix) -> Result<f64, SpaError> {
    if eval.n == 0 {
        return Ok(0.0);
    }
    let mut correct = 0usize;
    for i in 0..eval.n {
        if spa_predict(model, eval.row(i))? == eval.labels[i] {
            correct += 1;
        }
    }
    Ok(correct as f64 / eval.n as f64)
}

/// Pick (k, p) from the grid.
///
/// `InnerCv` never sees `eval`; `OracleOnEval` scores cells on it directly
/// and flags the result. Grid ties resolve to the first cell in grid order.
/// Cells whose inner folds cannot support a fit are skipped, not scored.
pub fn tune_hyperparameters(
    train: &FeatureMatrix,
    grid: &HyperparamGrid,
    protocol: TuneProtocol,
    eval: Option<&FeatureMatrix>,
    seed: u64,
) -> Result<TuneResult, SpaError> {
    let cells = grid.cells(train.min_class_count(), train.d);
    if cells.is_empty() {
        return Err(SpaError::InfeasibleGrid);
    }

    let folds = match protocol {
        TuneProtocol::InnerCv => {
            let f = 5usize.min(train.min_class_count());
            if f < 2 {
                return Err(SpaError::InfeasibleGrid);
            }
            Some(stratified_kfold(&train.labels, f, seed)?)
        }
        TuneProtocol::OracleOnEval => None,
    };

    let mut table = Vec::new();
    let mut best: Option<(usize, usize, f64)> = None;
    for (k, p) in cells {
        let score = match (&folds, protocol) {
            (Some(partition), TuneProtocol::InnerCv) => {
                let mut fold_scores = Vec::with_capacity(partition.len());
                let mut feasible = true;
                for test_rows in partition {
                    let train_rows: Vec<usize> = (0..train.n)
                        .filter(|i| !test_rows.contains(i))
                        .collect();
                    let inner_train = train.select_rows(&train_rows);
                    let inner_test = train.select_rows(test_rows);
                    let model = match SpaModel::new(inner_train, k, p) {
                        Ok(m) => m,
                        Err(SpaError::InsufficientNeighbors { .. }) => {
                            feasible = false;
                            break;
                        }
                        Err(e) => return Err(e),
                    };
                    fold_scores.push(fraction_correct(&model, &inner_test)?);
                }
                if !feasible {
                    continue;
                }
                fold_scores.iter().sum::<f64>() / fold_scores.len() as f64
            }
            (_, TuneProtocol::OracleOnEval) => {
                let eval = eval.ok_or(SpaError::MissingEvalSet)?;
                let model = SpaModel::new(train.clone(), k, p)?;
                fraction_correct(&model, eval)?
            }
            _ => unreachable!(),
        };
        table.push((k, p, score));
        let better = match best {
            None => true,
            Some((_, _, best_score)) => score > best_score,
        };
        if better {
            best = Some((k, p, score));
        }
    }

    let (k, p, _) = best.ok_or(SpaError::InfeasibleGrid)?;
    Ok(TuneResult {
        k,
        p,
        table,
        oracle_tuned: protocol == TuneProtocol::OracleOnEval,
    })
}
