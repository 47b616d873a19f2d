//! Full-pipeline test on a recording-shaped fixture: a GDF file with EEG
//! and EOG channels, cue events, and a class-dependent mu-rhythm amplitude
//! contrast, pushed through convert → band-pass → window → CSP → classify.

mod common;

use common::{encode_gdf, FixtureChannel, GdfFixture};
use sphera_core::epochs::{drop_channels, epochs_from_events};
use sphera_core::eval::{kfold_cv, PipelineSpec};
use sphera_core::filter::{extract_window, preprocess_set, BandpassSpec};
use sphera_core::rng::CounterRng;
use sphera_core::spa::{HyperparamGrid, TuneProtocol};
use sphera_tools::gdf::parse_gdf;

/// A session of cue-paced trials at 250 Hz. During the two seconds after
/// each cue, the class modulates the 11 Hz amplitude on one of two motor
/// channels (an ERD-like contrast); everything rides on broadband noise.
fn synth_session(n_per_class: usize, seed: u64) -> Vec<u8> {
    let fs = 250.0;
    let trial_len = 4.0; // seconds from cue to rest
    let lead_in = 2.0;
    let n_trials = 2 * n_per_class;
    let n_samples = ((lead_in + trial_len * n_trials as f64 + 2.0) * fs) as usize;

    let mut rng = CounterRng::new(seed);
    let mut order: Vec<u8> = (0..n_trials).map(|i| 1 + (i % 2) as u8).collect();
    rng.shuffle(&mut order);

    let channel_count = 6; // 4 EEG + 2 EOG
    let mut channels: Vec<Vec<f64>> = (0..channel_count)
        .map(|_| (0..n_samples).map(|_| 3.0 * rng.next_gaussian()).collect())
        .collect();

    let mut events = Vec::new();
    for (t, &label) in order.iter().enumerate() {
        let cue = ((lead_in + trial_len * t as f64) * fs) as usize;
        let code = if label == 1 { 769 } else { 770 };
        events.push((cue, code));
        // mu burst on the class-specific channel for 2 s after the cue
        let target = if label == 1 { 0 } else { 1 };
        for s in 0..(2.0 * fs) as usize {
            let phase = 2.0 * std::f64::consts::PI * 11.0 * s as f64 / fs;
            channels[target][cue + s] += 18.0 * phase.sin();
        }
    }

    let labels = ["EEG-C3", "EEG-C4", "EEG-Cz", "EEG-Pz", "EOG-left", "EOG-right"];
    let specs = channels
        .into_iter()
        .zip(labels)
        .map(|(data, label)| FixtureChannel::identity_i16(label, data))
        .collect();
    let mut fx = GdfFixture::new(specs, 250, 250);
    fx.events = events;
    encode_gdf(&fx)
}

#[test]
fn recording_to_accuracy() {
    let bytes = synth_session(30, 2024);
    let rec = parse_gdf(&bytes).unwrap();
    assert_eq!(rec.fs, 250.0);

    let set = epochs_from_events(&rec, &[(769, 1), (770, 2)], (0.0, 3.0), "e2e").unwrap();
    assert_eq!(set.n_trials, 60);
    assert_eq!(set.class_count(1), 30);

    let eeg_only = drop_channels(&set, &["EOG-left", "EOG-right"]).unwrap();
    assert_eq!(eeg_only.n_channels, 4);

    let spec = BandpassSpec::mu_beta(eeg_only.fs).unwrap();
    let filtered = preprocess_set(&eeg_only, &spec).unwrap();
    let windowed = extract_window(&filtered, 0.5, 2.5).unwrap();
    assert_eq!(windowed.n_samples, 500);

    let grid = HyperparamGrid {
        k_max_cap: 14,
        ..HyperparamGrid::default()
    };
    let methods = [
        PipelineSpec::csp_spa(1, grid, TuneProtocol::InnerCv),
        PipelineSpec::csp_lda(1, 0.0),
        PipelineSpec::mdrm(),
        PipelineSpec::ts_lda(0.05),
    ];
    for spec in methods {
        let name = spec.method_name();
        let report = kfold_cv(&windowed, &spec, 5, 9).unwrap();
        assert!(
            report.mean_pct >= 90.0,
            "{name}: {}% on a strong mu contrast",
            report.mean_pct
        );
    }
}
