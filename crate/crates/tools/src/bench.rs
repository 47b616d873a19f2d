//! Synthetic two-manifold benchmark: sweep training-set size and noise
//! level on a pair of concentric circles embedded in a random subspace,
//! and record the SPA error rate next to the separation-to-noise ratio
//! that governs it.

use sphera_core::eval::TaskRunner;
use sphera_core::rng::derive_stream;
use sphera_core::spa::{spa_predict, SpaError, SpaModel};
use sphera_core::synth::{min_separation, sample_two_manifolds, ManifoldSpec, NoisySample, SynthError};

use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchCell {
    pub n_per_class: usize,
    pub sigma: f64,
    pub error_pct: f64,
    pub separation: f64,
    /// δ²/σ²; infinite when σ = 0.
    pub snr: f64,
}

#[derive(Debug)]
pub enum BenchError {
    Synth(SynthError),
    Spa(SpaError),
}

impl std::fmt::Display for BenchError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BenchError::Synth(e) => write!(f, "{e}"),
            BenchError::Spa(e) => write!(f, "{e}"),
        }
    }
}

impl From<SynthError> for BenchError {
    fn from(e: SynthError) -> Self {
        BenchError::Synth(e)
    }
}
impl From<SpaError> for BenchError {
    fn from(e: SpaError) -> Self {
        BenchError::Spa(e)
    }
}

pub fn bench_manifolds(cfg: &RunConfig) -> (ManifoldSpec, ManifoldSpec) {
    let d = cfg.bench_ambient_dim;
    let frame_seed = derive_stream(cfg.seed, 0xF7A);
    let inner = ManifoldSpec::circle(d, vec![0.0; d], cfg.bench_radii[0], frame_seed);
    let outer = ManifoldSpec::circle(d, vec![0.0; d], cfg.bench_radii[1], frame_seed);
    (inner, outer)
}

/// Error rate of one (n, σ) cell, averaged over nothing: one train draw,
/// one test draw, both derived from `cell_seed`.
pub fn run_cell(
    cfg: &RunConfig,
    n_per_class: usize,
    sigma: f64,
    cell_seed: u64,
) -> Result<BenchCell, BenchError> {
    let (inner, outer) = bench_manifolds(cfg);
    let train: NoisySample =
        sample_two_manifolds(&inner, &outer, n_per_class, sigma, derive_stream(cell_seed, 0))?;
    let test = sample_two_manifolds(
        &inner,
        &outer,
        cfg.bench_n_test,
        sigma,
        derive_stream(cell_seed, 1),
    )?;

    let model = SpaModel::new(train.features, cfg.bench_k, cfg.bench_p)?;
    let mut wrong = 0usize;
    for i in 0..test.features.n {
        if spa_predict(&model, test.features.row(i))? != test.features.labels[i] {
            wrong += 1;
        }
    }
    let separation = min_separation(&inner, &outer);
    let snr = if sigma > 0.0 {
        separation * separation / (sigma * sigma)
    } else {
        f64::INFINITY
    };
    Ok(BenchCell {
        n_per_class,
        sigma,
        error_pct: 100.0 * wrong as f64 / test.features.n as f64,
        separation,
        snr,
    })
}

/// Sweep the configured (n, σ) grid. Cells run through the given runner;
/// results come back in grid order (n outer, σ inner).
pub fn synth_bench<R: TaskRunner>(cfg: &RunConfig, runner: &R) -> Result<Vec<BenchCell>, BenchError> {
    let cells: Vec<(usize, f64)> = cfg
        .bench_n
        .iter()
        .flat_map(|&n| cfg.bench_sigma.iter().map(move |&s| (n, s)))
        .collect();
    let task = |i: usize| -> Result<BenchCell, BenchError> {
        let (n, sigma) = cells[i];
        run_cell(cfg, n, sigma, derive_stream(cfg.seed, 0xBE7C ^ i as u64))
    };
    runner.run(cells.len(), &task).into_iter().collect()
}

/// Benchmark table as CSV.
pub fn render_bench_csv(cells: &[BenchCell]) -> String {
    let mut out = String::from("n_per_class,sigma,error_pct,separation,snr\r\n");
    for c in cells {
        let snr = if c.snr.is_finite() {
            format!("{:.6}", c.snr)
        } else {
            String::from("inf")
        };
        out.push_str(&format!(
            "{},{},{},{:.6},{}\r\n",
            c.n_per_class,
            c.sigma,
            sphera_core::eval::format_pct(c.error_pct),
            c.separation,
            snr
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use sphera_core::eval::SequentialRunner;

    fn small_cfg() -> RunConfig {
        RunConfig {
            bench_n: vec![50, 200],
            bench_sigma: vec![0.0, 0.1],
            bench_n_test: 100,
            bench_k: 10,
            bench_p: 1,
            bench_ambient_dim: 6,
            seed: 5,
            ..RunConfig::default()
        }
    }

    #[test]
    fn noiseless_disjoint_circles_have_zero_error() {
        let cfg = small_cfg();
        let cells = synth_bench(&cfg, &SequentialRunner).unwrap();
        for c in cells.iter().filter(|c| c.sigma == 0.0) {
            assert_eq!(c.error_pct, 0.0, "cell {c:?}");
            assert!(c.snr.is_infinite());
        }
        // separation of circles with radii 1 and 3 is 2
        assert!((cells[0].separation - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_is_deterministic() {
        let cfg = small_cfg();
        let a = synth_bench(&cfg, &SequentialRunner).unwrap();
        let b = synth_bench(&cfg, &SequentialRunner).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn error_trend_rises_with_noise() {
        // doubling sigma at fixed n should rarely reduce the error
        let mut cfg = small_cfg();
        cfg.bench_n = vec![300];
        cfg.bench_sigma = vec![0.2, 0.4, 0.8];
        cfg.bench_n_test = 200;
        let mut non_decreasing = 0usize;
        let mut total = 0usize;
        for seed in 0..20 {
            cfg.seed = 1000 + seed;
            let cells = synth_bench(&cfg, &SequentialRunner).unwrap();
            for pair in cells.windows(2) {
                total += 1;
                if pair[1].error_pct >= pair[0].error_pct {
                    non_decreasing += 1;
                }
            }
        }
        assert!(
            non_decreasing * 10 >= total * 8,
            "only {non_decreasing}/{total} adjacent cells non-decreasing"
        );
    }
}
