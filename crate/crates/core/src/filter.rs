//! Butterworth band-pass design and zero-phase filtering.
//!
//! The design path is the classic one: analog Butterworth prototype,
//! lowpass→bandpass transform, then bilinear transform with frequency
//! prewarping, realized as cascaded second-order sections. Prewarping pins
//! the digital magnitude at both band edges to exactly -3.01 dB.
//!
//! Filtering is offline and zero-phase: forward pass, reverse, forward pass,
//! reverse, with odd-reflection padding trimmed afterwards. A causal
//! single-pass mode is not provided here; the application order (filter the
//! full cue-locked segment, then crop the analysis window) keeps filter
//! transients outside the window used for classification.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::epochs::{EpochSet, EpochError};

#[derive(Debug, Clone, PartialEq)]
pub enum FilterError {
    /// Band edges must satisfy 0 < low < high < fs/2.
    BadBand { low_hz: f64, high_hz: f64, fs: f64 },
    BadOrder { order: usize },
    /// A designed section has a pole on or outside the unit circle.
    Unstable { pole_modulus: f64 },
    /// filtfilt needs more samples than the reflection padding.
    SignalTooShort { len: usize, min_len: usize },
    Epoch(EpochError),
}

impl core::fmt::Display for FilterError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FilterError::BadBand { low_hz, high_hz, fs } => write!(
                f,
                "band edges must satisfy 0 < {low_hz} < {high_hz} < fs/2 = {}",
                fs / 2.0
            ),
            FilterError::BadOrder { order } => write!(f, "filter order must be >= 1, got {order}"),
            FilterError::Unstable { pole_modulus } => {
                write!(f, "designed filter unstable (pole modulus {pole_modulus})")
            }
            FilterError::SignalTooShort { len, min_len } => {
                write!(f, "signal length {len} too short for zero-phase filtering (need > {min_len})")
            }
            FilterError::Epoch(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for FilterError {}

impl From<EpochError> for FilterError {
    fn from(e: EpochError) -> Self {
        FilterError::Epoch(e)
    }
}

/// Band-pass design parameters. `order` is the analog prototype order; the
/// digital band-pass has `2·order` poles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandpassSpec {
    pub low_hz: f64,
    pub high_hz: f64,
    pub order: usize,
    pub fs: f64,
}

impl BandpassSpec {
    pub fn new(low_hz: f64, high_hz: f64, order: usize, fs: f64) -> Result<Self, FilterError> {
        if order < 1 {
            return Err(FilterError::BadOrder { order });
        }
        if !(low_hz > 0.0 && low_hz < high_hz && high_hz < fs / 2.0) {
            return Err(FilterError::BadBand { low_hz, high_hz, fs });
        }
        Ok(Self {
            low_hz,
            high_hz,
            order,
            fs,
        })
    }

    /// The 8–30 Hz, fifth-order band used for mu/beta motor-imagery rhythms.
    pub fn mu_beta(fs: f64) -> Result<Self, FilterError> {
        Self::new(8.0, 30.0, 5, fs)
    }
}

/// One second-order section; denominator is `1 + a1 z⁻¹ + a2 z⁻²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    /// Largest pole modulus of this section.
    pub fn pole_modulus(&self) -> f64 {
        let disc = self.a1 * self.a1 - 4.0 * self.a2;
        if disc < 0.0 {
            libm::sqrt(self.a2)
        } else {
            let r = libm::sqrt(disc);
            let p1 = (-self.a1 + r) / 2.0;
            let p2 = (-self.a1 - r) / 2.0;
            libm::fabs(p1).max(libm::fabs(p2))
        }
    }
}

/// Cascade of second-order sections with one overall gain factor.
#[derive(Debug, Clone, PartialEq)]
pub struct BiquadCascade {
    pub sections: Vec<Biquad>,
    pub gain: f64,
}

impl BiquadCascade {
    /// Unity pass-through cascade.
    pub fn unity() -> Self {
        Self {
            sections: Vec::new(),
            gain: 1.0,
        }
    }

    pub fn max_pole_modulus(&self) -> f64 {
        self.sections
            .iter()
            .fold(0.0, |m, s| m.max(s.pole_modulus()))
    }

    /// Complex frequency response at `f_hz`.
    pub fn response(&self, f_hz: f64, fs: f64) -> Complex64 {
        let w = 2.0 * core::f64::consts::PI * f_hz / fs;
        let z1 = Complex64::new(libm::cos(-w), libm::sin(-w)); // z^-1
        let z2 = z1 * z1;
        let mut h = Complex64::new(self.gain, 0.0);
        for s in &self.sections {
            let num = Complex64::new(s.b0, 0.0) + z1 * s.b1 + z2 * s.b2;
            let den = Complex64::new(1.0, 0.0) + z1 * s.a1 + z2 * s.a2;
            h = h * num / den;
        }
        h
    }
}

/// Digital Butterworth band-pass as second-order sections.
pub fn design_butterworth_bandpass(spec: &BandpassSpec) -> Result<BiquadCascade, FilterError> {
    // revalidate: the struct fields are public and may have been built by hand
    let spec = BandpassSpec::new(spec.low_hz, spec.high_hz, spec.order, spec.fs)?;
    let fs2 = 2.0 * spec.fs;

    // prewarped analog edge frequencies
    let wl = fs2 * libm::tan(core::f64::consts::PI * spec.low_hz / spec.fs);
    let wh = fs2 * libm::tan(core::f64::consts::PI * spec.high_hz / spec.fs);
    let w0_sq = wl * wh;
    let bw = wh - wl;

    let bilinear = |s: Complex64| -> Complex64 {
        (Complex64::new(fs2, 0.0) + s) / (Complex64::new(fs2, 0.0) - s)
    };
    let section_from_conjugate_pair = |z: Complex64| -> Biquad {
        Biquad {
            b0: 1.0,
            b1: 0.0,
            b2: -1.0,
            a1: -2.0 * z.re,
            a2: z.norm_sqr(),
        }
    };

    let n = spec.order;
    let mut sections: Vec<Biquad> = Vec::with_capacity(n);
    for k in 0..n {
        let theta = core::f64::consts::PI * (2 * k + n + 1) as f64 / (2 * n) as f64;
        let p = Complex64::new(libm::cos(theta), libm::sin(theta));
        if p.im <= 1e-12 {
            // lower half-plane poles are the conjugates of ones already handled
            continue;
        }
        // lowpass -> bandpass: each prototype pole yields two poles
        let pb = p * bw;
        let disc = (pb * pb - Complex64::new(4.0 * w0_sq, 0.0)).sqrt();
        let s1 = (pb + disc) / 2.0;
        let s2 = (pb - disc) / 2.0;
        // s1/s2 pair with their conjugates (arising from the conjugate
        // prototype pole) to form two real sections
        sections.push(section_from_conjugate_pair(bilinear(s1)));
        sections.push(section_from_conjugate_pair(bilinear(s2)));
    }
    // the real prototype pole of odd orders
    if n % 2 == 1 {
        let pb = -bw;
        let disc = pb * pb - 4.0 * w0_sq;
        if disc < 0.0 {
            let s = Complex64::new(pb / 2.0, libm::sqrt(-disc) / 2.0);
            sections.push(section_from_conjugate_pair(bilinear(s)));
        } else {
            let r = libm::sqrt(disc);
            let z1 = bilinear(Complex64::new((pb + r) / 2.0, 0.0)).re;
            let z2 = bilinear(Complex64::new((pb - r) / 2.0, 0.0)).re;
            sections.push(Biquad {
                b0: 1.0,
                b1: 0.0,
                b2: -1.0,
                a1: -(z1 + z2),
                a2: z1 * z2,
            });
        }
    }

    let mut cascade = BiquadCascade { sections, gain: 1.0 };

    let max_mod = cascade.max_pole_modulus();
    if max_mod >= 1.0 - 1e-6 {
        return Err(FilterError::Unstable { pole_modulus: max_mod });
    }

    // Normalize to unit gain at the band center. The bilinear transform maps
    // the digital frequency below exactly onto the analog w0, where the
    // Butterworth band-pass has |H| = 1.
    let f_center = spec.fs / core::f64::consts::PI * libm::atan(libm::sqrt(w0_sq) / fs2);
    let mag = cascade.response(f_center, spec.fs).norm();
    cascade.gain = 1.0 / mag;
    Ok(cascade)
}

/// Magnitude response in dB at `f_hz` (requires `0 <= f_hz < fs/2`).
pub fn magnitude_response(c: &BiquadCascade, f_hz: f64, fs: f64) -> f64 {
    assert!(f_hz >= 0.0 && f_hz < fs / 2.0, "frequency out of range");
    20.0 * libm::log10(c.response(f_hz, fs).norm())
}

fn run_forward(c: &BiquadCascade, x: &mut [f64]) {
    for v in x.iter_mut() {
        *v *= c.gain;
    }
    for s in &c.sections {
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for v in x.iter_mut() {
            let input = *v;
            let y = s.b0 * input + s1;
            s1 = s.b1 * input - s.a1 * y + s2;
            s2 = s.b2 * input - s.a2 * y;
            *v = y;
        }
    }
}

/// Reflection padding length used by [`filtfilt`].
pub fn filtfilt_pad_len(c: &BiquadCascade) -> usize {
    3 * (2 * c.sections.len() + 1)
}

/// Zero-phase filtering: odd-reflection padding, then
/// forward → reverse → forward → reverse, then trim.
///
/// Magnitude response is applied twice, so attenuation doubles in dB while
/// the phase cancels exactly.
pub fn filtfilt(c: &BiquadCascade, x: &[f64]) -> Result<Vec<f64>, FilterError> {
    let pad = filtfilt_pad_len(c);
    let n = x.len();
    if n <= pad {
        return Err(FilterError::SignalTooShort { len: n, min_len: pad });
    }

    let mut ext = Vec::with_capacity(n + 2 * pad);
    let first = x[0];
    let last = x[n - 1];
    for i in 0..pad {
        ext.push(2.0 * first - x[pad - i]);
    }
    ext.extend_from_slice(x);
    for i in 0..pad {
        ext.push(2.0 * last - x[n - 2 - i]);
    }

    run_forward(c, &mut ext);
    ext.reverse();
    run_forward(c, &mut ext);
    ext.reverse();

    Ok(ext[pad..pad + n].to_vec())
}

/// Filter every channel of every trial independently; metadata unchanged.
pub fn preprocess_set(e: &EpochSet, spec: &BandpassSpec) -> Result<EpochSet, FilterError> {
    let cascade = design_butterworth_bandpass(spec)?;
    let mut out = e.clone();
    for t in 0..e.n_trials {
        for c in 0..e.n_channels {
            let filtered = filtfilt(&cascade, e.channel(t, c))?;
            let base = (t * e.n_channels + c) * e.n_samples;
            out.data[base..base + e.n_samples].copy_from_slice(&filtered);
        }
    }
    Ok(out)
}

/// Crop every trial to the `[t0, t1)` window, in seconds relative to the
/// start of the epoch. Same rounding convention as epoch extraction.
pub fn extract_window(e: &EpochSet, t0: f64, t1: f64) -> Result<EpochSet, FilterError> {
    if !(t1 > t0) {
        return Err(FilterError::Epoch(EpochError::BadWindow { t0, t1 }));
    }
    let start = libm::round(t0 * e.fs);
    let len = crate::epochs::window_len(t0, t1, e.fs);
    if start < 0.0 || start as usize + len > e.n_samples {
        return Err(FilterError::Epoch(EpochError::WindowOutOfBounds {
            event_index: 0,
            sample: start as usize,
        }));
    }
    let start = start as usize;
    let mut data = Vec::with_capacity(e.n_trials * e.n_channels * len);
    for t in 0..e.n_trials {
        for c in 0..e.n_channels {
            data.extend_from_slice(&e.channel(t, c)[start..start + len]);
        }
    }
    Ok(EpochSet::new(
        e.n_trials,
        e.n_channels,
        len,
        e.fs,
        data,
        e.labels.clone(),
        e.channel_names.clone(),
        e.subject_id.clone(),
    )?)
}

/// Analytic Butterworth band-pass magnitude (in dB) of the prewarped design
/// at digital frequency `f_hz`. Independent of the section realization, so
/// tests use it as an oracle for the designed cascade.
pub fn analytic_bandpass_db(spec: &BandpassSpec, f_hz: f64) -> f64 {
    let fs2 = 2.0 * spec.fs;
    let wl = fs2 * libm::tan(core::f64::consts::PI * spec.low_hz / spec.fs);
    let wh = fs2 * libm::tan(core::f64::consts::PI * spec.high_hz / spec.fs);
    let w = fs2 * libm::tan(core::f64::consts::PI * f_hz / spec.fs);
    let ratio = (w * w - wl * wh) / ((wh - wl) * w);
    -10.0 * libm::log10(1.0 + libm::pow(ratio * ratio, spec.order as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;
    use alloc::string::String;

    fn spec_8_30() -> BandpassSpec {
        BandpassSpec::new(8.0, 30.0, 5, 250.0).unwrap()
    }

    /// Least-squares fit of a·sin(wt) + b·cos(wt) over a sample range.
    fn fit_sinusoid(x: &[f64], f_hz: f64, fs: f64, range: core::ops::Range<usize>) -> (f64, f64) {
        let w = 2.0 * core::f64::consts::PI * f_hz / fs;
        let (mut ss, mut sc, mut cc, mut xs, mut xc) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in range {
            let s = libm::sin(w * i as f64);
            let c = libm::cos(w * i as f64);
            ss += s * s;
            sc += s * c;
            cc += c * c;
            xs += x[i] * s;
            xc += x[i] * c;
        }
        let det = ss * cc - sc * sc;
        let a = (xs * cc - xc * sc) / det;
        let b = (xc * ss - xs * sc) / det;
        (a, b) // amplitude hypot(a,b), phase atan2(b,a)
    }

    #[test]
    fn band_edges_sit_at_minus_three_db() {
        let c = design_butterworth_bandpass(&spec_8_30()).unwrap();
        for f in [8.0, 30.0] {
            let db = magnitude_response(&c, f, 250.0);
            assert!((db + 3.0103).abs() < 0.01, "{f} Hz -> {db} dB");
        }
    }

    #[test]
    fn band_center_nearly_flat() {
        let c = design_butterworth_bandpass(&spec_8_30()).unwrap();
        let f_center = libm::sqrt(8.0 * 30.0);
        let db = magnitude_response(&c, f_center, 250.0);
        assert!(db >= -0.1 && db <= 0.01, "center {db} dB");
        let oracle = analytic_bandpass_db(&spec_8_30(), f_center);
        assert!((db - oracle).abs() < 1e-6, "{db} vs analytic {oracle}");
    }

    #[test]
    fn stopband_attenuation() {
        let c = design_butterworth_bandpass(&spec_8_30()).unwrap();
        let spec = spec_8_30();
        for (f, max_db) in [(50.0, -20.0), (1.0, -40.0)] {
            let db = magnitude_response(&c, f, 250.0);
            assert!(db <= max_db, "{f} Hz -> {db} dB");
            let oracle = analytic_bandpass_db(&spec, f);
            assert!((db - oracle).abs() < 1e-6, "{db} vs analytic {oracle}");
        }
    }

    #[test]
    fn designed_cascade_is_stable() {
        let c = design_butterworth_bandpass(&spec_8_30()).unwrap();
        assert_eq!(c.sections.len(), 5);
        assert!(c.max_pole_modulus() < 1.0 - 1e-6);
    }

    #[test]
    fn rejects_bad_band() {
        assert!(matches!(
            BandpassSpec::new(8.0, 130.0, 5, 250.0),
            Err(FilterError::BadBand { .. })
        ));
        assert!(matches!(
            BandpassSpec::new(30.0, 8.0, 5, 250.0),
            Err(FilterError::BadBand { .. })
        ));
        assert!(matches!(
            BandpassSpec::new(8.0, 30.0, 0, 250.0),
            Err(FilterError::BadOrder { .. })
        ));
    }

    #[test]
    fn unity_cascade_is_zero_db() {
        let c = BiquadCascade::unity();
        for f in [0.0, 10.0, 60.0, 124.0] {
            assert!(magnitude_response(&c, f, 250.0).abs() < 1e-12);
        }
        let single = BiquadCascade {
            sections: alloc::vec![Biquad { b0: 1.0, b1: 0.0, b2: 0.0, a1: 0.0, a2: 0.0 }],
            gain: 1.0,
        };
        assert!(magnitude_response(&single, 17.0, 250.0).abs() < 1e-12);
    }

    #[test]
    fn filtfilt_zero_in_zero_out() {
        let c = design_butterworth_bandpass(&spec_8_30()).unwrap();
        let y = filtfilt(&c, &[0.0; 400]).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn filtfilt_rejects_short_signal() {
        let c = design_butterworth_bandpass(&spec_8_30()).unwrap();
        let pad = filtfilt_pad_len(&c);
        assert_eq!(pad, 33);
        assert!(matches!(
            filtfilt(&c, &alloc::vec![0.0; pad]),
            Err(FilterError::SignalTooShort { .. })
        ));
    }

    #[test]
    fn in_band_sinusoid_passes_with_zero_phase() {
        let c = design_butterworth_bandpass(&spec_8_30()).unwrap();
        let fs = 250.0;
        let f = 15.0;
        let n = 500; // 2 s
        let x: Vec<f64> = (0..n)
            .map(|i| libm::sin(2.0 * core::f64::consts::PI * f * i as f64 / fs))
            .collect();
        let y = filtfilt(&c, &x).unwrap();
        let (a, b) = fit_sinusoid(&y, f, fs, n / 2 - 100..n / 2 + 100);
        let amplitude = libm::sqrt(a * a + b * b);
        let phase = libm::atan2(b, a);
        assert!((amplitude - 1.0).abs() < 0.05, "amplitude {amplitude}");
        assert!(libm::fabs(phase) < 0.01, "phase {phase} rad");
    }

    #[test]
    fn out_of_band_sinusoid_is_suppressed() {
        let c = design_butterworth_bandpass(&spec_8_30()).unwrap();
        let fs = 250.0;
        let f = 50.0;
        let n = 500;
        let x: Vec<f64> = (0..n)
            .map(|i| libm::sin(2.0 * core::f64::consts::PI * f * i as f64 / fs))
            .collect();
        let y = filtfilt(&c, &x).unwrap();
        let (a, b) = fit_sinusoid(&y, f, fs, n / 2 - 100..n / 2 + 100);
        let amplitude = libm::sqrt(a * a + b * b);
        assert!(amplitude <= 0.03, "residual amplitude {amplitude}"); // >= 97% attenuation
    }

    #[test]
    fn filtfilt_is_linear() {
        let c = design_butterworth_bandpass(&spec_8_30()).unwrap();
        let mut rng = CounterRng::new(7);
        let x: Vec<f64> = (0..300).map(|_| rng.next_gaussian()).collect();
        let y: Vec<f64> = (0..300).map(|_| rng.next_gaussian()).collect();
        let (alpha, beta) = (1.7, -0.4);
        let combined: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + beta * b).collect();
        let lhs = filtfilt(&c, &combined).unwrap();
        let fx = filtfilt(&c, &x).unwrap();
        let fy = filtfilt(&c, &y).unwrap();
        let scale = lhs.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v))).max(1.0);
        for i in 0..300 {
            let rhs = alpha * fx[i] + beta * fy[i];
            assert!((lhs[i] - rhs).abs() < 1e-9 * scale);
        }
    }

    // Zero-phase symmetry: filtering a reversed signal reverses the output.
    // The forward and backward passes only commute once edge transients have
    // decayed (pole modulus ^ distance), so the assertion covers the signal
    // interior, a safe 700 samples in from either end.
    #[test]
    fn filtfilt_commutes_with_time_reversal_in_interior() {
        let c = design_butterworth_bandpass(&spec_8_30()).unwrap();
        let mut rng = CounterRng::new(8);
        let n = 2048;
        let x: Vec<f64> = (0..n).map(|_| rng.next_gaussian()).collect();
        let mut xr = x.clone();
        xr.reverse();
        let mut lhs = filtfilt(&c, &xr).unwrap();
        lhs.reverse();
        let rhs = filtfilt(&c, &x).unwrap();
        let scale = rhs.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v))).max(1.0);
        for i in 700..n - 700 {
            assert!(
                (lhs[i] - rhs[i]).abs() < 1e-9 * scale,
                "index {i}: {:.3e}",
                (lhs[i] - rhs[i]).abs() / scale
            );
        }
    }

    fn noise_set(n_trials: usize, n_channels: usize, n_samples: usize, seed: u64) -> EpochSet {
        let mut rng = CounterRng::new(seed);
        let data: Vec<f64> = (0..n_trials * n_channels * n_samples)
            .map(|_| rng.next_gaussian())
            .collect();
        let labels = (0..n_trials).map(|i| 1 + (i % 2) as u8).collect();
        let names = (0..n_channels).map(|i| alloc::format!("c{i}")).collect();
        EpochSet::new(n_trials, n_channels, n_samples, 250.0, data, labels, names, String::from("s"))
            .unwrap()
    }

    #[test]
    fn preprocess_zero_tensor_stays_zero() {
        let mut e = noise_set(2, 3, 200, 1);
        e.data.iter_mut().for_each(|v| *v = 0.0);
        let out = preprocess_set(&e, &spec_8_30()).unwrap();
        assert!(out.data.iter().all(|&v| v == 0.0));
        assert_eq!(out.labels, e.labels);
        assert_eq!(out.channel_names, e.channel_names);
    }

    #[test]
    fn preprocess_matches_channelwise_filtfilt() {
        let e = noise_set(1, 2, 240, 3);
        let c = design_butterworth_bandpass(&spec_8_30()).unwrap();
        let out = preprocess_set(&e, &spec_8_30()).unwrap();
        for ch in 0..2 {
            let direct = filtfilt(&c, e.channel(0, ch)).unwrap();
            assert_eq!(out.channel(0, ch), &direct[..]);
        }
    }

    /// Naive DFT power in all bins strictly above `f_min` Hz.
    fn high_band_power(x: &[f64], fs: f64, f_min: f64) -> f64 {
        let n = x.len();
        let mut total = 0.0;
        for k in 1..n / 2 {
            let f = k as f64 * fs / n as f64;
            if f <= f_min {
                continue;
            }
            let (mut re, mut im) = (0.0, 0.0);
            for (i, &v) in x.iter().enumerate() {
                let ang = -2.0 * core::f64::consts::PI * (k * i) as f64 / n as f64;
                re += v * libm::cos(ang);
                im += v * libm::sin(ang);
            }
            total += re * re + im * im;
        }
        total
    }

    #[test]
    fn white_noise_high_band_power_drops() {
        let e = noise_set(1, 1, 500, 11);
        let out = preprocess_set(&e, &spec_8_30()).unwrap();
        let before = high_band_power(e.channel(0, 0), 250.0, 40.0);
        let after = high_band_power(out.channel(0, 0), 250.0, 40.0);
        assert!(after <= 0.05 * before, "reduction {}", after / before);
    }

    #[test]
    fn extract_window_crops_samples() {
        let e = noise_set(2, 2, 1000, 5);
        let w = extract_window(&e, 0.5, 2.5).unwrap();
        assert_eq!(w.n_samples, 500);
        assert_eq!(w.channel(1, 1), &e.channel(1, 1)[125..625]);
        assert!(extract_window(&e, 0.5, 5.0).is_err());
    }
}
