//! Dense real matrices and the symmetric spectral decompositions the rest of
//! the crate is built on.
//!
//! Everything here targets the small matrices of multichannel biosignal work
//! (a few dozen rows at most). The eigensolver is a cyclic Jacobi iteration:
//! at these sizes it is robust, dependency-free, and bit-reproducible across
//! platforms, which matters more than raw speed.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Errors from matrix construction and decompositions.
#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    /// Operation requires a square matrix.
    NotSquare { rows: usize, cols: usize },
    /// Symmetry check failed.
    NotSymmetric { max_asymmetry: f64 },
    /// Operand shapes are incompatible.
    DimensionMismatch { expected: usize, got: usize },
    /// An eigenvalue at or below the positivity floor; carries the offender.
    SingularEigenvalue { eigenvalue: f64 },
    /// Linear system too ill-conditioned to solve reliably.
    IllConditioned { min_eigenvalue: f64, max_eigenvalue: f64 },
    /// Jacobi sweeps did not reach the convergence threshold.
    NoConvergence { off_diagonal: f64 },
}

impl core::fmt::Display for LinalgError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LinalgError::NotSquare { rows, cols } => {
                write!(f, "matrix is {rows}x{cols}, expected square")
            }
            LinalgError::NotSymmetric { max_asymmetry } => {
                write!(f, "matrix not symmetric (max |a_ij - a_ji| = {max_asymmetry:e})")
            }
            LinalgError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            LinalgError::SingularEigenvalue { eigenvalue } => {
                write!(f, "matrix is singular: eigenvalue {eigenvalue:e} at or below floor")
            }
            LinalgError::IllConditioned {
                min_eigenvalue,
                max_eigenvalue,
            } => write!(
                f,
                "system too ill-conditioned: |eigenvalues| span {min_eigenvalue:e} .. {max_eigenvalue:e}"
            ),
            LinalgError::NoConvergence { off_diagonal } => {
                write!(f, "eigensolver did not converge (off-diagonal norm {off_diagonal:e})")
            }
        }
    }
}

impl core::error::Error for LinalgError {}

/// Dense row-major matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Build from row-major data. Panics if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length must equal rows*cols");
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &v) in entries.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// Matrix–vector product.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "vector length must equal cols");
        (0..self.rows)
            .map(|i| dot(self.row(i), x))
            .collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Matrix::from_vec(self.rows, self.cols, data)
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Matrix::from_vec(self.rows, self.cols, data)
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix::from_vec(self.rows, self.cols, self.data.iter().map(|v| v * s).collect())
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| m.max(libm::fabs(v)))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// (A + Aᵀ)/2. Used to scrub round-off asymmetry from products that are
    /// symmetric in exact arithmetic.
    pub fn symmetrized(&self) -> Matrix {
        assert_eq!(self.rows, self.cols);
        Matrix::from_fn(self.rows, self.cols, |i, j| {
            0.5 * (self.get(i, j) + self.get(j, i))
        })
    }

    fn check_square(&self) -> Result<(), LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(())
    }

    fn check_symmetric(&self, tol: f64) -> Result<(), LinalgError> {
        self.check_square()?;
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max(libm::fabs(self.get(i, j) - self.get(j, i)));
            }
        }
        let scale = self.max_abs().max(1.0);
        if worst > tol * scale {
            return Err(LinalgError::NotSymmetric { max_asymmetry: worst });
        }
        Ok(())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Euclidean distance between two equal-length vectors.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Symmetric eigendecomposition: values sorted descending, `vectors` holds
/// the matching unit-norm eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEigen {
    /// V · diag(f(λ)) · Vᵀ
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.values.len();
        let mut out = Matrix::zeros(n, n);
        for k in 0..n {
            let w = f(self.values[k]);
            for i in 0..n {
                let vik = self.vectors.get(i, k);
                if vik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + w * vik * self.vectors.get(j, k);
                    out.set(i, j, v);
                }
            }
        }
        out.symmetrized()
    }
}

const SYMMETRY_TOL: f64 = 1e-9;
const JACOBI_MAX_SWEEPS: usize = 64;

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Converges when the off-diagonal Frobenius norm drops below 1e-12 of the
/// matrix norm. Eigenvalues come back descending; ordering ties are broken
/// by the original diagonal index and each eigenvector is flipped so its
/// largest-magnitude component is positive, making results deterministic.
pub fn sym_eig(a: &Matrix) -> Result<SymEigen, LinalgError> {
    a.check_symmetric(SYMMETRY_TOL)?;
    let n = a.rows();
    if n == 0 {
        return Ok(SymEigen {
            values: Vec::new(),
            vectors: Matrix::zeros(0, 0),
        });
    }

    let mut m = a.symmetrized();
    let mut v = Matrix::identity(n);
    let norm_a = m.frobenius_norm();
    let threshold = 1e-12 * norm_a;

    let off = |m: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let x = m.get(i, j);
                    s += x * x;
                }
            }
        }
        libm::sqrt(s)
    };

    let mut converged = norm_a == 0.0 || off(&m) <= threshold;
    if !converged {
        for _ in 0..JACOBI_MAX_SWEEPS {
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = m.get(p, q);
                    if apq == 0.0 {
                        continue;
                    }
                    let app = m.get(p, p);
                    let aqq = m.get(q, q);
                    // Rotation angle per Golub & Van Loan 8.4.
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + libm::sqrt(1.0 + theta * theta))
                    } else {
                        -1.0 / (-theta + libm::sqrt(1.0 + theta * theta))
                    };
                    let c = 1.0 / libm::sqrt(1.0 + t * t);
                    let s = t * c;

                    for k in 0..n {
                        let mkp = m.get(k, p);
                        let mkq = m.get(k, q);
                        m.set(k, p, c * mkp - s * mkq);
                        m.set(k, q, s * mkp + c * mkq);
                    }
                    for k in 0..n {
                        let mpk = m.get(p, k);
                        let mqk = m.get(q, k);
                        m.set(p, k, c * mpk - s * mqk);
                        m.set(q, k, s * mpk + c * mqk);
                    }
                    for k in 0..n {
                        let vkp = v.get(k, p);
                        let vkq = v.get(k, q);
                        v.set(k, p, c * vkp - s * vkq);
                        v.set(k, q, s * vkp + c * vkq);
                    }
                }
            }
            if off(&m) <= threshold {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence { off_diagonal: off(&m) });
    }

    // Sort descending; ties keep the lower original index first.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m.get(j, j)
            .partial_cmp(&m.get(i, i))
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });

    let values: Vec<f64> = order.iter().map(|&k| m.get(k, k)).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        // Sign convention: largest-magnitude component positive.
        let mut best = 0usize;
        let mut best_abs = 0.0;
        for i in 0..n {
            let x = libm::fabs(v.get(i, old_col));
            if x > best_abs {
                best_abs = x;
                best = i;
            }
        }
        let flip = if v.get(best, old_col) < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors.set(i, new_col, flip * v.get(i, old_col));
        }
    }

    Ok(SymEigen { values, vectors })
}

/// Floor below which an eigenvalue counts as singular for SPD operations.
pub const SPD_EIG_FLOOR: f64 = 1e-12;

fn spd_eigen(a: &Matrix) -> Result<SymEigen, LinalgError> {
    let eig = sym_eig(a)?;
    for &v in &eig.values {
        if v <= SPD_EIG_FLOOR {
            return Err(LinalgError::SingularEigenvalue { eigenvalue: v });
        }
    }
    Ok(eig)
}

/// Symmetric inverse square root A^(-1/2) of an SPD matrix, so that
/// `result · a · resultᵀ = I`.
pub fn spd_inv_sqrt(a: &Matrix) -> Result<Matrix, LinalgError> {
    Ok(spd_eigen(a)?.apply(|l| 1.0 / libm::sqrt(l)))
}

/// Symmetric square root A^(1/2) of an SPD matrix.
pub fn spd_sqrt(a: &Matrix) -> Result<Matrix, LinalgError> {
    Ok(spd_eigen(a)?.apply(libm::sqrt))
}

/// Matrix logarithm of an SPD matrix (symmetric result).
pub fn spd_log(a: &Matrix) -> Result<Matrix, LinalgError> {
    Ok(spd_eigen(a)?.apply(libm::log))
}

/// Matrix exponential of a symmetric matrix (SPD result).
pub fn spd_exp(s: &Matrix) -> Result<Matrix, LinalgError> {
    Ok(sym_eig(s)?.apply(libm::exp))
}

/// Eigenvalues of b⁻¹a for SPD `a`, `b`, descending. Computed through the
/// congruence b^(-1/2)·a·b^(-1/2), which has the same spectrum.
pub fn generalized_eigvals(a: &Matrix, b: &Matrix) -> Result<Vec<f64>, LinalgError> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.rows(),
            got: b.rows(),
        });
    }
    a.check_symmetric(SYMMETRY_TOL)?;
    let w = spd_inv_sqrt(b)?;
    let m = w.matmul(a).matmul(&w).symmetrized();
    let eig = spd_eigen(&m)?;
    Ok(eig.values)
}

/// Solve `a · x = rhs` for symmetric `a` through its eigendecomposition,
/// failing when the spectrum spans more than twelve orders of magnitude.
pub fn solve_linear(a: &Matrix, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if a.rows() != rhs.len() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.rows(),
            got: rhs.len(),
        });
    }
    let eig = sym_eig(a)?;
    let max = eig.values.iter().fold(0.0f64, |m, &v| m.max(libm::fabs(v)));
    let min = eig
        .values
        .iter()
        .fold(f64::INFINITY, |m, &v| m.min(libm::fabs(v)));
    if min <= SPD_EIG_FLOOR * max || max == 0.0 {
        return Err(LinalgError::IllConditioned {
            min_eigenvalue: min,
            max_eigenvalue: max,
        });
    }
    // x = V Λ⁻¹ Vᵀ rhs
    let n = rhs.len();
    let mut coeffs = vec![0.0; n];
    for k in 0..n {
        let vk = eig.vectors.column(k);
        coeffs[k] = dot(&vk, rhs) / eig.values[k];
    }
    let mut x = vec![0.0; n];
    for k in 0..n {
        for i in 0..n {
            x[i] += coeffs[k] * eig.vectors.get(i, k);
        }
    }
    Ok(x)
}

/// Debug rendering of a matrix, mostly for test failure messages.
pub fn format_matrix(m: &Matrix) -> String {
    let mut s = String::new();
    for i in 0..m.rows() {
        s.push('[');
        for j in 0..m.cols() {
            s.push_str(&format!(" {:10.4e}", m.get(i, j)));
        }
        s.push_str(" ]\n");
    }
    s
}
