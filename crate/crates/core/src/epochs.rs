//! Labeled trial tensors and cue-locked epoch extraction.
//!
//! [`EpochSet`] is the raw currency of the pipeline: a `[trial][channel][sample]`
//! tensor in physical units with one class label per trial. Labels are
//! restricted to the two-class motor-imagery setting (1 = left hand,
//! 2 = right hand).

use alloc::string::String;
use alloc::vec::Vec;

use crate::linalg::Matrix;

pub type Label = u8;

pub const LABEL_CLASS1: Label = 1;
pub const LABEL_CLASS2: Label = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum EpochError {
    ShapeMismatch { expected: usize, got: usize },
    InvalidLabel { trial: usize, label: Label },
    InvalidSamplingRate { fs: f64 },
    UnknownChannel { name: String },
    WindowOutOfBounds { event_index: usize, sample: usize },
    BadWindow { t0: f64, t1: f64 },
    EventsNotIncreasing { index: usize },
    EventOutOfSignal { index: usize, sample: usize },
    MissingClass { label: Label },
}

impl core::fmt::Display for EpochError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EpochError::ShapeMismatch { expected, got } => {
                write!(f, "tensor length {got} does not match extents (expected {expected})")
            }
            EpochError::InvalidLabel { trial, label } => {
                write!(f, "trial {trial} has label {label}, expected 1 or 2")
            }
            EpochError::InvalidSamplingRate { fs } => write!(f, "sampling rate must be > 0, got {fs}"),
            EpochError::UnknownChannel { name } => write!(f, "unknown channel name {name:?}"),
            EpochError::WindowOutOfBounds { event_index, sample } => write!(
                f,
                "window for event {event_index} (cue sample {sample}) exceeds recording bounds"
            ),
            EpochError::BadWindow { t0, t1 } => write!(f, "window end {t1} must exceed start {t0}"),
            EpochError::EventsNotIncreasing { index } => {
                write!(f, "event sample indices not strictly increasing at event {index}")
            }
            EpochError::EventOutOfSignal { index, sample } => {
                write!(f, "event {index} at sample {sample} lies outside the signal")
            }
            EpochError::MissingClass { label } => {
                write!(f, "training input has no trial of class {label}")
            }
        }
    }
}

impl core::error::Error for EpochError {}

/// Labeled multichannel trial tensor with sampling metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochSet {
    pub n_trials: usize,
    pub n_channels: usize,
    pub n_samples: usize,
    /// Sampling rate in Hz.
    pub fs: f64,
    /// `[trial][channel][sample]`, flattened row-major.
    pub data: Vec<f64>,
    pub labels: Vec<Label>,
    pub channel_names: Vec<String>,
    pub subject_id: String,
}

impl EpochSet {
    pub fn new(
        n_trials: usize,
        n_channels: usize,
        n_samples: usize,
        fs: f64,
        data: Vec<f64>,
        labels: Vec<Label>,
        channel_names: Vec<String>,
        subject_id: String,
    ) -> Result<Self, EpochError> {
        if !(fs > 0.0) {
            return Err(EpochError::InvalidSamplingRate { fs });
        }
        let expected = n_trials * n_channels * n_samples;
        if data.len() != expected {
            return Err(EpochError::ShapeMismatch {
                expected,
                got: data.len(),
            });
        }
        if labels.len() != n_trials {
            return Err(EpochError::ShapeMismatch {
                expected: n_trials,
                got: labels.len(),
            });
        }
        if channel_names.len() != n_channels {
            return Err(EpochError::ShapeMismatch {
                expected: n_channels,
                got: channel_names.len(),
            });
        }
        for (trial, &label) in labels.iter().enumerate() {
            if label != LABEL_CLASS1 && label != LABEL_CLASS2 {
                return Err(EpochError::InvalidLabel { trial, label });
            }
        }
        Ok(Self {
            n_trials,
            n_channels,
            n_samples,
            fs,
            data,
            labels,
            channel_names,
            subject_id,
        })
    }

    /// An empty set sharing the metadata shape of `self`.
    pub fn empty_like(&self) -> EpochSet {
        EpochSet {
            n_trials: 0,
            n_channels: self.n_channels,
            n_samples: self.n_samples,
            fs: self.fs,
            data: Vec::new(),
            labels: Vec::new(),
            channel_names: self.channel_names.clone(),
            subject_id: self.subject_id.clone(),
        }
    }

    #[inline]
    pub fn trial(&self, t: usize) -> &[f64] {
        let stride = self.n_channels * self.n_samples;
        &self.data[t * stride..(t + 1) * stride]
    }

    #[inline]
    pub fn trial_mut(&mut self, t: usize) -> &mut [f64] {
        let stride = self.n_channels * self.n_samples;
        &mut self.data[t * stride..(t + 1) * stride]
    }

    #[inline]
    pub fn channel(&self, t: usize, c: usize) -> &[f64] {
        let base = (t * self.n_channels + c) * self.n_samples;
        &self.data[base..base + self.n_samples]
    }

    /// Copy of trial `t` as a channels × samples matrix.
    pub fn trial_matrix(&self, t: usize) -> Matrix {
        Matrix::from_vec(self.n_channels, self.n_samples, self.trial(t).to_vec())
    }

    pub fn class_count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// New set containing the given trials, in the given order.
    pub fn select_trials(&self, indices: &[usize]) -> EpochSet {
        let stride = self.n_channels * self.n_samples;
        let mut data = Vec::with_capacity(indices.len() * stride);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            data.extend_from_slice(self.trial(i));
            labels.push(self.labels[i]);
        }
        EpochSet {
            n_trials: indices.len(),
            n_channels: self.n_channels,
            n_samples: self.n_samples,
            fs: self.fs,
            data,
            labels,
            channel_names: self.channel_names.clone(),
            subject_id: self.subject_id.clone(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn require_both_classes(&self) -> Result<(), EpochError> {
        for label in [LABEL_CLASS1, LABEL_CLASS2] {
            if self.class_count(label) == 0 {
                return Err(EpochError::MissingClass { label });
            }
        }
        Ok(())
    }
}

/// Continuous multichannel recording with an event table.
#[derive(Debug, Clone)]
pub struct ContinuousRecording {
    pub fs: f64,
    pub n_channels: usize,
    pub n_samples: usize,
    /// `[channel][sample]`, flattened row-major.
    pub signal: Vec<f64>,
    /// (sample index, event code), sorted by sample index, within the signal.
    pub events: Vec<(usize, u16)>,
    pub channel_names: Vec<String>,
}

impl ContinuousRecording {
    pub fn new(
        fs: f64,
        n_channels: usize,
        n_samples: usize,
        signal: Vec<f64>,
        events: Vec<(usize, u16)>,
        channel_names: Vec<String>,
    ) -> Result<Self, EpochError> {
        if !(fs > 0.0) {
            return Err(EpochError::InvalidSamplingRate { fs });
        }
        if signal.len() != n_channels * n_samples {
            return Err(EpochError::ShapeMismatch {
                expected: n_channels * n_samples,
                got: signal.len(),
            });
        }
        // Sorted, duplicates allowed: recordings can stamp several markers
        // on the same sample (e.g. a rejected-trial flag at trial onset).
        let mut prev: Option<usize> = None;
        for (i, &(sample, _)) in events.iter().enumerate() {
            if sample >= n_samples {
                return Err(EpochError::EventOutOfSignal { index: i, sample });
            }
            if let Some(p) = prev {
                if sample < p {
                    return Err(EpochError::EventsNotIncreasing { index: i });
                }
            }
            prev = Some(sample);
        }
        Ok(Self {
            fs,
            n_channels,
            n_samples,
            signal,
            events,
            channel_names,
        })
    }

    #[inline]
    pub fn channel(&self, c: usize) -> &[f64] {
        &self.signal[c * self.n_samples..(c + 1) * self.n_samples]
    }
}

/// Number of samples in a `[t0, t1)` window at rate `fs`.
pub fn window_len(t0: f64, t1: f64, fs: f64) -> usize {
    libm::round((t1 - t0) * fs) as usize
}

/// Cut one trial per mapped cue out of a continuous recording.
///
/// The window `[t0, t1)` is in seconds relative to the cue sample. Start
/// sample is `round(cue + t0·fs)` and every trial gets exactly
/// `round((t1-t0)·fs)` samples, so trial length never depends on where the
/// cue falls. Trials that would cross a recording edge are an error, not
/// zero-padded: padding would bias covariance estimates.
pub fn epochs_from_events(
    rec: &ContinuousRecording,
    cue_codes: &[(u16, Label)],
    window: (f64, f64),
    subject_id: &str,
) -> Result<EpochSet, EpochError> {
    let (t0, t1) = window;
    if !(t1 > t0) {
        return Err(EpochError::BadWindow { t0, t1 });
    }
    let len = window_len(t0, t1, rec.fs);

    let mut starts: Vec<(usize, Label)> = Vec::new();
    for (i, &(sample, code)) in rec.events.iter().enumerate() {
        let Some(&(_, label)) = cue_codes.iter().find(|&&(c, _)| c == code) else {
            continue;
        };
        let start = libm::round(sample as f64 + t0 * rec.fs);
        if start < 0.0 || (start as usize) + len > rec.n_samples {
            return Err(EpochError::WindowOutOfBounds {
                event_index: i,
                sample,
            });
        }
        starts.push((start as usize, label));
    }

    let n_trials = starts.len();
    let mut data = Vec::with_capacity(n_trials * rec.n_channels * len);
    let mut labels = Vec::with_capacity(n_trials);
    for &(start, label) in &starts {
        for c in 0..rec.n_channels {
            data.extend_from_slice(&rec.channel(c)[start..start + len]);
        }
        labels.push(label);
    }

    EpochSet::new(
        n_trials,
        rec.n_channels,
        len,
        rec.fs,
        data,
        labels,
        rec.channel_names.clone(),
        String::from(subject_id),
    )
}

/// Remove the named channels, preserving the order of the survivors.
pub fn drop_channels(e: &EpochSet, names: &[&str]) -> Result<EpochSet, EpochError> {
    for &name in names {
        if !e.channel_names.iter().any(|n| n == name) {
            return Err(EpochError::UnknownChannel {
                name: String::from(name),
            });
        }
    }
    let keep: Vec<usize> = (0..e.n_channels)
        .filter(|&c| !names.contains(&e.channel_names[c].as_str()))
        .collect();

    let mut data = Vec::with_capacity(e.n_trials * keep.len() * e.n_samples);
    for t in 0..e.n_trials {
        for &c in &keep {
            data.extend_from_slice(e.channel(t, c));
        }
    }
    EpochSet::new(
        e.n_trials,
        keep.len(),
        e.n_samples,
        e.fs,
        data,
        e.labels.clone(),
        keep.iter().map(|&c| e.channel_names[c].clone()).collect(),
        e.subject_id.clone(),
    )
}
