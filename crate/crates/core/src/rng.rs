//! Deterministic, counter-based random number generation.
//!
//! Every stochastic step in this crate (synthetic data, fold partitions,
//! subsampling) draws from a [`CounterRng`]: the i-th output is a pure
//! function of `(key, i)`, so independent streams can be evaluated in any
//! order — or on any number of threads — and still reproduce bit-identical
//! results. Stream keys are derived from a master seed with an avalanche
//! mix, never by splitting generator state.

use alloc::vec::Vec;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer: a full-avalanche bijection on u64.
#[inline]
fn mix(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    z
}

/// Derive the key for an independent stream from a master seed.
///
/// Used wherever a task (a fold, a replicate, a grid cell) needs its own
/// generator: `derive_stream(master, task_index)`.
#[inline]
pub fn derive_stream(master: u64, stream: u64) -> u64 {
    mix(master.wrapping_add(GOLDEN) ^ mix(stream.wrapping_mul(GOLDEN) ^ 0x5851_F42D_4C95_7F2D))
}

/// Counter-based uniform generator with cached Box–Muller output.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
    gauss_cache: Option<f64>,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self {
            key: mix(seed ^ GOLDEN),
            counter: 0,
            gauss_cache: None,
        }
    }

    /// Generator for stream `stream` of master seed `master`.
    pub fn stream(master: u64, stream: u64) -> Self {
        Self::new(derive_stream(master, stream))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix(self.key ^ self.counter.wrapping_mul(GOLDEN))
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, n). n must be nonzero.
    #[inline]
    pub fn next_below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        // Lemire multiply-shift; bias is < 2^-64 and irrelevant at our sizes.
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Standard normal deviate via Box–Muller.
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(g) = self.gauss_cache.take() {
            return g;
        }
        // u1 in (0, 1] so the log is finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        let radius = libm::sqrt(-2.0 * libm::log(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.gauss_cache = Some(radius * libm::sin(theta));
        radius * libm::cos(theta)
    }

    /// In-place Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, slice: &mut [T]) {
        for i in (1..slice.len()).rev() {
            let j = self.next_below(i + 1);
            slice.swap(i, j);
        }
    }

    /// A shuffled `0..n` index vector.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        self.shuffle(&mut idx);
        idx
    }
}
