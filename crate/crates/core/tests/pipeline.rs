//! End-to-end pipeline checks on synthetic multichannel data: band-pass,
//! window, spatial filters, classifier, cross-validated.

use sphera_core::baselines::lda::{lda_fit, lda_predict};
use sphera_core::eval::{kfold_cv, PipelineSpec};
use sphera_core::filter::{extract_window, preprocess_set, BandpassSpec};
use sphera_core::spa::{spa_predict, HyperparamGrid, SpaModel, TuneProtocol};
use sphera_core::synth::{sample_mixed_sources, sample_two_manifolds, ManifoldSpec};

#[test]
fn filtered_pipeline_classifies_mixed_sources() {
    // 1.6 s trials at 250 Hz so the cue-locked window [0.5, 1.5) fits
    let (raw, _) = sample_mixed_sources(
        4,
        400,
        24,
        &[8.0, 1.0, 1.0, 1.0],
        &[1.0, 8.0, 1.0, 1.0],
        99,
    );
    let spec = BandpassSpec::new(8.0, 30.0, 5, 250.0).unwrap();
    let filtered = preprocess_set(&raw, &spec).unwrap();
    let windowed = extract_window(&filtered, 0.5, 1.5).unwrap();
    assert_eq!(windowed.n_samples, 250);

    // the variance contrast is broadband, so it survives the band-pass
    let report = kfold_cv(&windowed, &PipelineSpec::csp_lda(1, 0.0), 6, 5).unwrap();
    assert!(report.mean_pct >= 95.0, "mean accuracy {}", report.mean_pct);
}

// The point of local sphere fits: a curved class boundary that no linear
// rule can separate. Concentric rings put LDA at chance while the sphere
// classifier stays near perfect.
#[test]
fn sphere_classifier_beats_linear_rule_on_curved_classes() {
    let d = 5;
    let inner = ManifoldSpec::circle(d, vec![0.0; d], 1.0, 4);
    let outer = ManifoldSpec::circle(d, vec![0.0; d], 2.0, 4);
    let train = sample_two_manifolds(&inner, &outer, 150, 0.05, 21).unwrap();
    let test = sample_two_manifolds(&inner, &outer, 100, 0.05, 22).unwrap();

    let lda = lda_fit(&train.features, 0.0).unwrap();
    let spa = SpaModel::new(train.features, 12, 1).unwrap();

    let mut lda_correct = 0usize;
    let mut spa_correct = 0usize;
    for i in 0..test.features.n {
        let x = test.features.row(i);
        if lda_predict(&lda, x) == test.features.labels[i] {
            lda_correct += 1;
        }
        if spa_predict(&spa, x).unwrap() == test.features.labels[i] {
            spa_correct += 1;
        }
    }
    let lda_acc = lda_correct as f64 / test.features.n as f64;
    let spa_acc = spa_correct as f64 / test.features.n as f64;
    assert!(
        (0.35..=0.65).contains(&lda_acc),
        "linear rule should sit near chance on rings, got {lda_acc}"
    );
    assert!(spa_acc >= 0.98, "sphere classifier got {spa_acc}");
}

#[test]
fn all_four_methods_run_on_the_same_data() {
    let (set, _) = sample_mixed_sources(
        3,
        150,
        20,
        &[6.0, 1.0, 1.0],
        &[1.0, 6.0, 1.0],
        17,
    );
    let grid = HyperparamGrid {
        k_max_cap: 12,
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
        let report = kfold_cv(&set, &spec, 5, 3).unwrap();
        assert_eq!(report.method, name);
        assert_eq!(report.runs.len(), 5);
        assert!(
            report.mean_pct >= 90.0,
            "{name} accuracy {} on separable data",
            report.mean_pct
        );
    }
}
