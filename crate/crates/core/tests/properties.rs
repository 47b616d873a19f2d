//! Property tests for the geometric and algebraic invariants the library
//! is built on.

use proptest::prelude::*;

use sphera_core::csp::FeatureMatrix;
use sphera_core::filter::{design_butterworth_bandpass, filtfilt, BandpassSpec};
use sphera_core::linalg::{distance, dot, norm, Matrix};
use sphera_core::rng::CounterRng;
use sphera_core::spa::{project_to_sphere, spa_predict_detailed, spca_fit, SpaModel};
use sphera_core::baselines::riemann::{mdrm_fit, mdrm_predict};
use sphera_core::linalg::{spd_exp, spd_log};

/// Random orthogonal matrix from Gram-Schmidt on seeded Gaussian columns.
fn random_orthogonal(d: usize, seed: u64) -> Matrix {
    let mut rng = CounterRng::new(seed);
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.next_gaussian()).collect();
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
    Matrix::from_fn(d, d, |i, j| cols[j][i])
}

fn two_circle_features(n_per_class: usize, sigma: f64, seed: u64) -> FeatureMatrix {
    let mut rng = CounterRng::new(seed);
    let mut fm = FeatureMatrix::empty(2);
    for (label, r) in [(1u8, 1.0), (2u8, 3.0)] {
        for _ in 0..n_per_class {
            let theta = 2.0 * std::f64::consts::PI * rng.next_f64();
            fm.push_row(
                &[
                    r * theta.cos() + sigma * rng.next_gaussian(),
                    r * theta.sin() + sigma * rng.next_gaussian(),
                ],
                label,
            );
        }
    }
    fm
}

fn apply_isometry(fm: &FeatureMatrix, q: &Matrix, shift: &[f64]) -> FeatureMatrix {
    let mut out = FeatureMatrix::empty(fm.d);
    for i in 0..fm.n {
        let x = fm.row(i);
        let mapped: Vec<f64> = (0..fm.d)
            .map(|r| (0..fm.d).map(|c| q.get(r, c) * x[c]).sum::<f64>() + shift[r])
            .collect();
        out.push_row(&mapped, fm.labels[i]);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // Rigid motions of the feature space preserve every SPA decision
    // (up to genuine distance ties).
    #[test]
    fn spa_is_isometry_equivariant(seed in 0u64..1000, iso_seed in 0u64..1000, tx in -5.0f64..5.0, ty in -5.0f64..5.0) {
        let train = two_circle_features(25, 0.1, seed);
        let q = random_orthogonal(2, iso_seed);
        let shift = [tx, ty];
        let train_t = apply_isometry(&train, &q, &shift);

        let model = SpaModel::new(train, 8, 1).unwrap();
        let model_t = SpaModel::new(train_t, 8, 1).unwrap();

        let mut rng = CounterRng::new(seed ^ 0xABCD);
        for _ in 0..20 {
            let x = [4.0 * rng.next_gaussian(), 4.0 * rng.next_gaussian()];
            let xt: Vec<f64> = (0..2)
                .map(|r| (0..2).map(|c| q.get(r, c) * x[c]).sum::<f64>() + shift[r])
                .collect();
            let (la, d1a, d2a) = spa_predict_detailed(&model, &x).unwrap();
            let (lb, d1b, d2b) = spa_predict_detailed(&model_t, &xt).unwrap();
            // distances are preserved up to round-off
            prop_assert!((d1a - d1b).abs() < 1e-9 && (d2a - d2b).abs() < 1e-9);
            // labels can only differ across an exact tie
            prop_assert!(la == lb || (d1a - d2a).abs() < 1e-9);
        }
    }

    // Scaling all features by a positive constant scales both sphere
    // distances equally, so predictions are unchanged.
    #[test]
    fn spa_is_scale_invariant(seed in 0u64..1000, alpha in 0.05f64..20.0) {
        let train = two_circle_features(25, 0.1, seed);
        let mut scaled = FeatureMatrix::empty(2);
        for i in 0..train.n {
            let row: Vec<f64> = train.row(i).iter().map(|v| alpha * v).collect();
            scaled.push_row(&row, train.labels[i]);
        }
        let model = SpaModel::new(train, 8, 1).unwrap();
        let model_s = SpaModel::new(scaled, 8, 1).unwrap();
        let mut rng = CounterRng::new(seed ^ 0xBEEF);
        for _ in 0..20 {
            let x = [4.0 * rng.next_gaussian(), 4.0 * rng.next_gaussian()];
            let xs = [alpha * x[0], alpha * x[1]];
            let (la, d1, d2) = spa_predict_detailed(&model, &x).unwrap();
            let (lb, _, _) = spa_predict_detailed(&model_s, &xs).unwrap();
            prop_assert!(la == lb || (d1 - d2).abs() < 1e-12);
        }
    }

    // Exact sphere data is recovered whenever n >= p+2 well-spread points
    // are available, across ambient dimensions.
    #[test]
    fn spca_recovers_exact_spheres(
        p in 1usize..3,
        extra in 0usize..12,
        d in 3usize..8,
        radius in 0.5f64..4.0,
        rot_seed in 0u64..1000,
    ) {
        let n = p + 2 + extra;
        let q = random_orthogonal(d, rot_seed);
        let mut center = vec![0.0; d];
        for (i, c) in center.iter_mut().enumerate() {
            *c = (i as f64) - 1.3;
        }
        // well-spread points: equal angles for circles, Fibonacci-style
        // spiral for 2-spheres, rotated by q into general position
        let points = Matrix::from_fn(n, d, |i, j| {
            let local: Vec<f64> = if p == 1 {
                let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64 + 0.31;
                vec![theta.cos(), theta.sin()]
            } else {
                let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let r_xy = (1.0 - z * z).sqrt();
                let phi = golden * i as f64;
                vec![r_xy * phi.cos(), r_xy * phi.sin(), z]
            };
            let mut v = center[j];
            for (axis, &l) in local.iter().enumerate() {
                v += radius * l * q.get(j, axis);
            }
            v
        });
        let sphere = spca_fit(&points, p).unwrap();
        prop_assert!((sphere.radius_r - radius).abs() < 1e-8, "radius {} vs {radius}", sphere.radius_r);
        prop_assert!(distance(&sphere.center_c, &center) < 1e-8);
    }

    // Projecting onto a sphere twice is the same as projecting once.
    #[test]
    fn projection_is_idempotent(seed in 0u64..1000, x0 in -6.0f64..6.0, x1 in -6.0f64..6.0, x2 in -6.0f64..6.0) {
        let mut rng = CounterRng::new(seed);
        let points = Matrix::from_fn(12, 3, |i, j| {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / 12.0;
            let local = [theta.cos(), theta.sin()];
            let q = random_orthogonal(3, seed ^ 0x77);
            2.0 * (local[0] * q.get(j, 0) + local[1] * q.get(j, 1)) + 0.1 * (j as f64)
                + 0.0 * rng.next_f64()
        });
        let sphere = spca_fit(&points, 1).unwrap();
        let x = [x0, x1, x2];
        let once = project_to_sphere(&sphere, &x);
        let twice = project_to_sphere(&sphere, &once);
        prop_assert!(distance(&once, &twice) < 1e-9);
    }

    // filtfilt is a linear operator.
    #[test]
    fn filtfilt_linearity(seed in 0u64..1000, alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let spec = BandpassSpec::new(8.0, 30.0, 5, 250.0).unwrap();
        let cascade = design_butterworth_bandpass(&spec).unwrap();
        let mut rng = CounterRng::new(seed);
        let x: Vec<f64> = (0..200).map(|_| rng.next_gaussian()).collect();
        let y: Vec<f64> = (0..200).map(|_| rng.next_gaussian()).collect();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + beta * b).collect();
        let lhs = filtfilt(&cascade, &mix).unwrap();
        let fx = filtfilt(&cascade, &x).unwrap();
        let fy = filtfilt(&cascade, &y).unwrap();
        let scale = lhs.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..200 {
            prop_assert!((lhs[i] - (alpha * fx[i] + beta * fy[i])).abs() < 1e-9 * scale);
        }
    }

    // MDRM decisions are invariant under a joint congruence of every
    // covariance (the metric is affine-invariant).
    #[test]
    fn mdrm_is_congruence_invariant(seed in 0u64..200) {
        let mut rng = CounterRng::new(seed);
        let base1 = Matrix::diag(&[2.0, 1.0]);
        let base2 = Matrix::diag(&[1.0, 2.0]);
        let make = |center: &Matrix, rng: &mut CounterRng| -> Matrix {
            let noise = Matrix::from_fn(2, 2, |_, _| 0.2 * rng.next_gaussian()).symmetrized();
            spd_exp(&spd_log(center).unwrap().add(&noise)).unwrap()
        };
        let mut covs = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..10 {
            covs.push(make(&base1, &mut rng));
            labels.push(1u8);
            covs.push(make(&base2, &mut rng));
            labels.push(2u8);
        }
        // random invertible congruence
        let m = Matrix::from_fn(2, 2, |i, j| rng.next_gaussian() + if i == j { 1.5 } else { 0.0 });
        let congruent = |c: &Matrix| m.transpose().matmul(c).matmul(&m).symmetrized();

        let model = mdrm_fit(&covs, &labels).unwrap();
        let covs_t: Vec<Matrix> = covs.iter().map(&congruent).collect();
        let model_t = mdrm_fit(&covs_t, &labels).unwrap();

        for _ in 0..10 {
            let probe = make(&base1, &mut rng);
            let a = mdrm_predict(&model, &probe).unwrap();
            let b = mdrm_predict(&model_t, &congruent(&probe)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
