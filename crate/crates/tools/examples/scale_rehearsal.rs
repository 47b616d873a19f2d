//! Offline scale rehearsal: a full-size synthetic subject through the
//! 10-fold CV protocol, to measure the per-subject cost envelope.

use std::time::Instant;

use sphera_core::epochs::{drop_channels, epochs_from_events, ContinuousRecording};
use sphera_core::eval::{kfold_cv_with, ExperimentOptions, PipelineSpec};
use sphera_core::filter::{extract_window, preprocess_set, BandpassSpec};
use sphera_core::rng::CounterRng;
use sphera_core::spa::{HyperparamGrid, TuneProtocol};
use sphera_tools::runner::ThreadedRunner;

fn main() {
    let fs = 250.0;
    let n_trials = 288usize;
    let trial_period = 8.0;
    let n_channels = 25usize; // 22 EEG + 3 EOG
    let n_samples = ((n_trials as f64 * trial_period + 10.0) * fs) as usize;

    let mut rng = CounterRng::new(99);
    let mut order: Vec<u8> = (0..n_trials).map(|i| 1 + (i % 2) as u8).collect();
    rng.shuffle(&mut order);

    println!("building {} samples x {} channels...", n_samples, n_channels);
    let mut signal = vec![0.0f64; n_channels * n_samples];
    for v in signal.iter_mut() {
        *v = 8.0 * rng.next_gaussian();
    }
    let mut events = Vec::new();
    for (t, &label) in order.iter().enumerate() {
        let cue = ((4.0 + trial_period * t as f64) * fs) as usize;
        events.push((cue, if label == 1 { 769 } else { 770 }));
        let target = if label == 1 { 7 } else { 11 }; // "C3"/"C4"-ish channels
        for s in 0..(2.0 * fs) as usize {
            let phase = 2.0 * std::f64::consts::PI * 11.0 * s as f64 / fs;
            // weak contrast: realistic-ish SNR rather than a giveaway
            signal[target * n_samples + cue + s] += 6.0 * phase.sin();
        }
    }
    let names: Vec<String> = (0..22)
        .map(|i| format!("EEG-{i:02}"))
        .chain(["EOG-left".into(), "EOG-central".into(), "EOG-right".into()])
        .collect();
    let rec = ContinuousRecording::new(fs, n_channels, n_samples, signal, events, names).unwrap();

    let start = Instant::now();
    let set = epochs_from_events(&rec, &[(769, 1), (770, 2)], (0.0, 3.0), "rehearsal").unwrap();
    let set = drop_channels(&set, &["EOG-left", "EOG-central", "EOG-right"]).unwrap();
    let spec = BandpassSpec::new(8.0, 30.0, 5, fs).unwrap();
    let set = preprocess_set(&set, &spec).unwrap();
    let set = extract_window(&set, 0.5, 2.5).unwrap();
    println!("prepare: {:?} ({} trials, {} ch, {} samples)", start.elapsed(), set.n_trials, set.n_channels, set.n_samples);

    let runner = ThreadedRunner::new(8);
    let t_spa = Instant::now();
    let spa = kfold_cv_with(
        &runner,
        &set,
        &PipelineSpec::csp_spa(3, HyperparamGrid::default(), TuneProtocol::InnerCv),
        10,
        42,
        &ExperimentOptions::default(),
    )
    .unwrap();
    println!("csp+spa 10-fold: {:?}, mean {:.2}%", t_spa.elapsed(), spa.mean_pct);

    let t_lda = Instant::now();
    let lda = kfold_cv_with(
        &runner,
        &set,
        &PipelineSpec::csp_lda(3, 0.0),
        10,
        42,
        &ExperimentOptions::default(),
    )
    .unwrap();
    println!("csp+lda 10-fold: {:?}, mean {:.2}%", t_lda.elapsed(), lda.mean_pct);
    println!("total per subject: {:?}", start.elapsed());
}
