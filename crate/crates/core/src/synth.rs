//! Synthetic data generators: noisy samples from a pair of embedded
//! manifolds (spheres or arcs) for classifier consistency experiments, and
//! mixed-source multichannel trials for spatial-filter tests.
//!
//! All generation is a pure function of the inputs and a seed.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::csp::FeatureMatrix;
use crate::epochs::EpochSet;
use crate::linalg::{distance, dot, norm, Matrix};
use crate::rng::CounterRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManifoldKind {
    /// Full p-sphere.
    PSphere,
    /// Half-circle (angle in [0, π]); intrinsic dimension must be 1.
    Arc,
}

/// A p-sphere (or arc) of a given radius, living in a seeded random
/// (p+1)-dimensional subspace around `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldSpec {
    pub kind: ManifoldKind,
    pub ambient_dim: usize,
    pub intrinsic_dim: usize,
    pub center: Vec<f64>,
    pub radius: f64,
    /// Deterministic orientation of the embedding subspace.
    pub subspace_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SynthError {
    DimensionMismatch { left: usize, right: usize },
    BadSpec { reason: &'static str },
}

impl core::fmt::Display for SynthError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SynthError::DimensionMismatch { left, right } => {
                write!(f, "manifold ambient dimensions differ: {left} vs {right}")
            }
            SynthError::BadSpec { reason } => write!(f, "invalid manifold spec: {reason}"),
        }
    }
}

impl core::error::Error for SynthError {}

impl ManifoldSpec {
    pub fn circle(ambient_dim: usize, center: Vec<f64>, radius: f64, subspace_seed: u64) -> Self {
        Self {
            kind: ManifoldKind::PSphere,
            ambient_dim,
            intrinsic_dim: 1,
            center,
            radius,
            subspace_seed,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.intrinsic_dim + 1 > self.ambient_dim {
            return Err(SynthError::BadSpec {
                reason: "intrinsic dimension + 1 exceeds ambient dimension",
            });
        }
        if !(self.radius > 0.0) {
            return Err(SynthError::BadSpec { reason: "radius must be positive" });
        }
        if self.center.len() != self.ambient_dim {
            return Err(SynthError::BadSpec { reason: "center length != ambient dimension" });
        }
        if self.kind == ManifoldKind::Arc && self.intrinsic_dim != 1 {
            return Err(SynthError::BadSpec { reason: "arcs are one-dimensional" });
        }
        Ok(())
    }

    /// Orthonormal D×(p+1) frame of the embedding subspace, a pure function
    /// of `subspace_seed` (Gram–Schmidt on seeded Gaussian vectors).
    pub fn frame(&self) -> Matrix {
        let d = self.ambient_dim;
        let cols = self.intrinsic_dim + 1;
        let mut rng = CounterRng::new(self.subspace_seed);
        let mut frame: Vec<Vec<f64>> = Vec::with_capacity(cols);
        while frame.len() < cols {
            let mut v: Vec<f64> = (0..d).map(|_| rng.next_gaussian()).collect();
            for u in &frame {
                let proj = dot(&v, u);
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
            }
            let len = norm(&v);
            if len < 1e-9 {
                continue; // essentially never; redraw
            }
            for vi in v.iter_mut() {
                *vi /= len;
            }
            frame.push(v);
        }
        Matrix::from_fn(d, cols, |i, j| frame[j][i])
    }

    /// Arc angular span in radians (π for [`ManifoldKind::Arc`]).
    pub fn arc_span(&self) -> f64 {
        core::f64::consts::PI
    }

    /// One point on the manifold drawn from its uniform measure: uniform
    /// angle for circles and arcs, uniform area via a normalized Gaussian
    /// direction for higher-dimensional spheres.
    fn sample_point(&self, frame: &Matrix, rng: &mut CounterRng) -> Vec<f64> {
        let d = self.ambient_dim;
        let cols = self.intrinsic_dim + 1;
        let direction: Vec<f64> = if self.intrinsic_dim == 1 {
            let theta = match self.kind {
                ManifoldKind::PSphere => 2.0 * core::f64::consts::PI * rng.next_f64(),
                ManifoldKind::Arc => self.arc_span() * rng.next_f64(),
            };
            vec![libm::cos(theta), libm::sin(theta)]
        } else {
            let mut g: Vec<f64> = (0..cols).map(|_| rng.next_gaussian()).collect();
            let len = norm(&g);
            for v in g.iter_mut() {
                *v /= len;
            }
            g
        };
        let mut point = self.center.clone();
        for j in 0..cols {
            for i in 0..d {
                point[i] += self.radius * direction[j] * frame.get(i, j);
            }
        }
        point
    }

    /// Nearest manifold point to an arbitrary ambient point.
    pub fn closest_point(&self, x: &[f64]) -> Vec<f64> {
        let frame = self.frame();
        self.closest_point_with_frame(&frame, x)
    }

    fn closest_point_with_frame(&self, frame: &Matrix, x: &[f64]) -> Vec<f64> {
        let d = self.ambient_dim;
        let cols = self.intrinsic_dim + 1;
        let mut local = vec![0.0; cols];
        for j in 0..cols {
            for i in 0..d {
                local[j] += frame.get(i, j) * (x[i] - self.center[i]);
            }
        }
        match self.kind {
            ManifoldKind::PSphere => {
                let len = norm(&local);
                if len < 1e-12 {
                    local = vec![0.0; cols];
                    local[0] = 1.0;
                } else {
                    for v in local.iter_mut() {
                        *v /= len;
                    }
                }
            }
            ManifoldKind::Arc => {
                let theta = libm::atan2(local[1], local[0]);
                let clamped = if theta < 0.0 {
                    // nearest arc endpoint by circular distance
                    if -theta < self.arc_span() / 2.0 {
                        0.0
                    } else {
                        self.arc_span()
                    }
                } else {
                    theta.min(self.arc_span())
                };
                local = vec![libm::cos(clamped), libm::sin(clamped)];
            }
        }
        let mut point = self.center.clone();
        for j in 0..cols {
            for i in 0..d {
                point[i] += self.radius * local[j] * frame.get(i, j);
            }
        }
        point
    }
}

/// Noisy two-class sample with the underlying clean manifold points kept
/// for assertions.
#[derive(Debug, Clone)]
pub struct NoisySample {
    pub features: FeatureMatrix,
    /// Clean manifold points zᵢ, one row per feature row.
    pub clean_points: Matrix,
    pub sigma: f64,
}

/// Draw `n_per_class` noisy points around each manifold: z uniform on the
/// manifold, x = z + ε with ε ~ N(0, σ²·I). Class 1 rows come first.
pub fn sample_two_manifolds(
    spec1: &ManifoldSpec,
    spec2: &ManifoldSpec,
    n_per_class: usize,
    sigma: f64,
    seed: u64,
) -> Result<NoisySample, SynthError> {
    spec1.validate()?;
    spec2.validate()?;
    if spec1.ambient_dim != spec2.ambient_dim {
        return Err(SynthError::DimensionMismatch {
            left: spec1.ambient_dim,
            right: spec2.ambient_dim,
        });
    }
    let d = spec1.ambient_dim;
    let mut features = FeatureMatrix::empty(d);
    let mut clean = Vec::with_capacity(2 * n_per_class * d);

    for (class_index, spec) in [spec1, spec2].into_iter().enumerate() {
        let frame = spec.frame();
        let mut point_rng = CounterRng::stream(seed, 2 * class_index as u64);
        let mut noise_rng = CounterRng::stream(seed, 2 * class_index as u64 + 1);
        for _ in 0..n_per_class {
            let z = spec.sample_point(&frame, &mut point_rng);
            let x: Vec<f64> = z
                .iter()
                .map(|&zi| zi + sigma * noise_rng.next_gaussian())
                .collect();
            clean.extend_from_slice(&z);
            features.push_row(&x, class_index as u8 + 1);
        }
    }

    Ok(NoisySample {
        clean_points: Matrix::from_vec(2 * n_per_class, d, clean),
        features,
        sigma,
    })
}

fn frames_share_subspace(a: &ManifoldSpec, b: &ManifoldSpec) -> bool {
    if a.intrinsic_dim + 1 == a.ambient_dim && b.intrinsic_dim + 1 == b.ambient_dim {
        return true; // both span the full ambient space
    }
    a.kind == ManifoldKind::PSphere
        && b.kind == ManifoldKind::PSphere
        && a.intrinsic_dim == b.intrinsic_dim
        && a.subspace_seed == b.subspace_seed
}

fn offset_in_subspace(spec: &ManifoldSpec, offset: &[f64]) -> bool {
    let frame = spec.frame();
    let d = spec.ambient_dim;
    let cols = spec.intrinsic_dim + 1;
    let mut in_plane = vec![0.0; d];
    for j in 0..cols {
        let mut t = 0.0;
        for i in 0..d {
            t += frame.get(i, j) * offset[i];
        }
        for i in 0..d {
            in_plane[i] += frame.get(i, j) * t;
        }
    }
    let residual: f64 = offset
        .iter()
        .zip(&in_plane)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    libm::sqrt(residual) <= 1e-9 * norm(offset).max(1.0)
}

/// Minimum Euclidean distance between two manifolds.
///
/// Co-subspace sphere pairs (concentric, offset within the shared subspace,
/// or full-ambient) use the closed form; everything else — arcs and
/// differently oriented subspaces — is minimized numerically by alternating
/// closest-point projections from a grid of starts.
pub fn min_separation(spec1: &ManifoldSpec, spec2: &ManifoldSpec) -> f64 {
    assert_eq!(
        spec1.ambient_dim, spec2.ambient_dim,
        "manifolds must share the ambient space"
    );
    let offset: Vec<f64> = spec2
        .center
        .iter()
        .zip(&spec1.center)
        .map(|(a, b)| a - b)
        .collect();
    let gap = norm(&offset);

    let coplanar = spec1.kind == ManifoldKind::PSphere
        && spec2.kind == ManifoldKind::PSphere
        && frames_share_subspace(spec1, spec2)
        && (gap == 0.0 || offset_in_subspace(spec1, &offset));
    if coplanar {
        let r1 = spec1.radius;
        let r2 = spec2.radius;
        if gap >= r1 + r2 {
            return gap - r1 - r2;
        }
        let inner = libm::fabs(r1 - r2) - gap;
        return inner.max(0.0);
    }

    // multi-start alternating projections
    let frame1 = spec1.frame();
    let starts = 64;
    let mut best = f64::INFINITY;
    let mut dir_rng = CounterRng::new(spec1.subspace_seed ^ spec2.subspace_seed ^ 0xA5A5);
    for s in 0..starts {
        let mut y1 = if spec1.intrinsic_dim == 1 {
            let span = match spec1.kind {
                ManifoldKind::PSphere => 2.0 * core::f64::consts::PI,
                ManifoldKind::Arc => spec1.arc_span(),
            };
            let theta = span * s as f64 / starts as f64;
            let mut p = spec1.center.clone();
            for i in 0..spec1.ambient_dim {
                p[i] += spec1.radius
                    * (libm::cos(theta) * frame1.get(i, 0) + libm::sin(theta) * frame1.get(i, 1));
            }
            p
        } else {
            spec1.sample_point(&frame1, &mut dir_rng)
        };
        let mut dist = f64::INFINITY;
        for _ in 0..200 {
            let y2 = spec2.closest_point(&y1);
            let next_y1 = spec1.closest_point(&y2);
            let new_dist = distance(&next_y1, &y2);
            y1 = next_y1;
            if (dist - new_dist).abs() < 1e-14 {
                dist = new_dist;
                break;
            }
            dist = new_dist;
        }
        best = best.min(dist);
    }
    best
}

/// Two-class mixed-source trials: per-class source variances, mixed by a
/// seeded random orthogonal matrix. Returns the set and the mixing matrix
/// (ground truth for assertions).
pub fn sample_mixed_sources(
    n_channels: usize,
    n_samples: usize,
    n_trials_per_class: usize,
    profile_class1: &[f64],
    profile_class2: &[f64],
    seed: u64,
) -> (EpochSet, Matrix) {
    assert_eq!(profile_class1.len(), n_channels);
    assert_eq!(profile_class2.len(), n_channels);
    assert!(profile_class1.iter().chain(profile_class2).all(|&v| v > 0.0));

    // random orthogonal mixing matrix: Gram-Schmidt on Gaussian columns
    let mut rng = CounterRng::stream(seed, 0);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n_channels);
    while cols.len() < n_channels {
        let mut v: Vec<f64> = (0..n_channels).map(|_| rng.next_gaussian()).collect();
        for u in &cols {
            let proj = dot(&v, u);
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= proj * ui;
            }
        }
        let len = norm(&v);
        if len < 1e-9 {
            continue;
        }
        for vi in v.iter_mut() {
            *vi /= len;
        }
        cols.push(v);
    }
    let mixing = Matrix::from_fn(n_channels, n_channels, |i, j| cols[j][i]);

    let mut data = Vec::with_capacity(2 * n_trials_per_class * n_channels * n_samples);
    let mut labels = Vec::with_capacity(2 * n_trials_per_class);
    let mut source_rng = CounterRng::stream(seed, 1);
    for (label, profile) in [(1u8, profile_class1), (2u8, profile_class2)] {
        for _ in 0..n_trials_per_class {
            let sources = Matrix::from_fn(n_channels, n_samples, |ch, _| {
                libm::sqrt(profile[ch]) * source_rng.next_gaussian()
            });
            let mixed = mixing.matmul(&sources);
            data.extend_from_slice(mixed.data());
            labels.push(label);
        }
    }

    let channel_names: Vec<String> = (0..n_channels).map(|i| format!("ch{i:02}")).collect();
    let set = EpochSet::new(
        2 * n_trials_per_class,
        n_channels,
        n_samples,
        250.0,
        data,
        labels,
        channel_names,
        String::from("synthetic"),
    )
    .expect("generated extents are consistent");
    (set, mixing)
}
