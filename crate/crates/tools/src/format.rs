//! Portable binary formats and CSV import.
//!
//! Every binary artifact shares one convention: a single-line UTF-8 JSON
//! header terminated by `\n`, followed by a little-endian 32-bit float
//! payload whose length the header fully determines. Trailing or missing
//! payload bytes are an error, never silently ignored.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sphera_core::csp::{CspModel, FeatureMatrix};
use sphera_core::epochs::{EpochError, EpochSet, Label};
use sphera_core::linalg::Matrix;
use sphera_core::spa::{SpaError, SpaModel};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("missing newline-terminated header line")]
    MissingHeader,
    #[error("malformed header: {0}")]
    BadHeader(#[from] serde_json::Error),
    #[error("payload size mismatch: header implies {expected} bytes, found {got}")]
    PayloadSizeMismatch { expected: usize, got: usize },
    #[error("csv line {line}: {what}")]
    Csv { line: usize, what: String },
    #[error("{0}")]
    Epoch(#[from] EpochError),
    #[error("{0}")]
    Spa(#[from] SpaError),
}

fn read_file(path: &Path) -> Result<Vec<u8>, FormatError> {
    fs::read(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    fs::write(path, bytes).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn split_header(bytes: &[u8]) -> Result<(&[u8], &[u8]), FormatError> {
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or(FormatError::MissingHeader)?;
    Ok((&bytes[..newline], &bytes[newline + 1..]))
}

fn payload_to_f64(payload: &[u8], expected_values: usize) -> Result<Vec<f64>, FormatError> {
    if payload.len() != expected_values * 4 {
        return Err(FormatError::PayloadSizeMismatch {
            expected: expected_values * 4,
            got: payload.len(),
        });
    }
    Ok(payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect())
}

fn f64_to_payload(values: &[f64], out: &mut Vec<u8>) {
    for &v in values {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
}

#[derive(Serialize, Deserialize)]
struct EpochHeader {
    n_trials: usize,
    n_channels: usize,
    n_samples: usize,
    fs: f64,
    labels: Vec<Label>,
    channel_names: Vec<String>,
    subject_id: String,
}

pub fn epochs_to_bytes(e: &EpochSet) -> Vec<u8> {
    let header = EpochHeader {
        n_trials: e.n_trials,
        n_channels: e.n_channels,
        n_samples: e.n_samples,
        fs: e.fs,
        labels: e.labels.clone(),
        channel_names: e.channel_names.clone(),
        subject_id: e.subject_id.clone(),
    };
    let mut out = serde_json::to_string(&header).expect("header is serializable").into_bytes();
    out.push(b'\n');
    f64_to_payload(&e.data, &mut out);
    out
}

pub fn epochs_from_bytes(bytes: &[u8]) -> Result<EpochSet, FormatError> {
    let (header, payload) = split_header(bytes)?;
    let header: EpochHeader = serde_json::from_slice(header)?;
    let data = payload_to_f64(payload, header.n_trials * header.n_channels * header.n_samples)?;
    Ok(EpochSet::new(
        header.n_trials,
        header.n_channels,
        header.n_samples,
        header.fs,
        data,
        header.labels,
        header.channel_names,
        header.subject_id,
    )?)
}

pub fn write_epochs_binary(e: &EpochSet, path: &Path) -> Result<(), FormatError> {
    write_file(path, &epochs_to_bytes(e))
}

pub fn read_epochs_binary(path: &Path) -> Result<EpochSet, FormatError> {
    epochs_from_bytes(&read_file(path)?)
}

#[derive(Serialize, Deserialize)]
struct CspHeader {
    n_channels: usize,
    m: usize,
    selected_rows: Vec<usize>,
}

pub fn csp_model_to_bytes(model: &CspModel) -> Vec<u8> {
    let header = CspHeader {
        n_channels: model.n_channels,
        m: model.m,
        selected_rows: model.selected_rows.clone(),
    };
    let mut out = serde_json::to_string(&header).expect("header is serializable").into_bytes();
    out.push(b'\n');
    f64_to_payload(model.w_full.data(), &mut out);
    out
}

pub fn csp_model_from_bytes(bytes: &[u8]) -> Result<CspModel, FormatError> {
    let (header, payload) = split_header(bytes)?;
    let header: CspHeader = serde_json::from_slice(header)?;
    let n = header.n_channels;
    let data = payload_to_f64(payload, n * n)?;
    Ok(CspModel {
        w_full: Matrix::from_vec(n, n, data),
        selected_rows: header.selected_rows,
        m: header.m,
        n_channels: n,
    })
}

pub fn write_csp_model(model: &CspModel, path: &Path) -> Result<(), FormatError> {
    write_file(path, &csp_model_to_bytes(model))
}

pub fn read_csp_model(path: &Path) -> Result<CspModel, FormatError> {
    csp_model_from_bytes(&read_file(path)?)
}

#[derive(Serialize, Deserialize)]
struct SpaHeader {
    k: usize,
    p: usize,
    n: usize,
    d: usize,
    labels: Vec<Label>,
}

pub fn spa_model_to_bytes(model: &SpaModel) -> Vec<u8> {
    let header = SpaHeader {
        k: model.k,
        p: model.p,
        n: model.train.n,
        d: model.train.d,
        labels: model.train.labels.clone(),
    };
    let mut out = serde_json::to_string(&header).expect("header is serializable").into_bytes();
    out.push(b'\n');
    f64_to_payload(&model.train.values, &mut out);
    out
}

pub fn spa_model_from_bytes(bytes: &[u8]) -> Result<SpaModel, FormatError> {
    let (header, payload) = split_header(bytes)?;
    let header: SpaHeader = serde_json::from_slice(header)?;
    let values = payload_to_f64(payload, header.n * header.d)?;
    let train = FeatureMatrix::new(header.n, header.d, values, header.labels);
    Ok(SpaModel::new(train, header.k, header.p)?)
}

pub fn write_spa_model(model: &SpaModel, path: &Path) -> Result<(), FormatError> {
    write_file(path, &spa_model_to_bytes(model))
}

pub fn read_spa_model(path: &Path) -> Result<SpaModel, FormatError> {
    spa_model_from_bytes(&read_file(path)?)
}

#[derive(Serialize, Deserialize)]
struct FeatureHeader {
    n: usize,
    d: usize,
    labels: Vec<Label>,
}

pub fn features_to_bytes(fm: &FeatureMatrix) -> Vec<u8> {
    let header = FeatureHeader {
        n: fm.n,
        d: fm.d,
        labels: fm.labels.clone(),
    };
    let mut out = serde_json::to_string(&header).expect("header is serializable").into_bytes();
    out.push(b'\n');
    f64_to_payload(&fm.values, &mut out);
    out
}

pub fn features_from_bytes(bytes: &[u8]) -> Result<FeatureMatrix, FormatError> {
    let (header, payload) = split_header(bytes)?;
    let header: FeatureHeader = serde_json::from_slice(header)?;
    let values = payload_to_f64(payload, header.n * header.d)?;
    Ok(FeatureMatrix::new(header.n, header.d, values, header.labels))
}

pub fn write_features(fm: &FeatureMatrix, path: &Path) -> Result<(), FormatError> {
    write_file(path, &features_to_bytes(fm))
}

pub fn read_features(path: &Path) -> Result<FeatureMatrix, FormatError> {
    features_from_bytes(&read_file(path)?)
}

/// Import epochs from CSV: one row per (trial, channel); first column the
/// trial index, second the class label, remaining columns the samples.
/// Rows of one trial must be contiguous (their order defines the channel
/// order) and trials must be numbered 0, 1, 2, … in file order.
pub fn parse_epochs_csv(text: &str, fs: f64, subject_id: &str) -> Result<EpochSet, FormatError> {
    let mut trials: Vec<(Label, Vec<Vec<f64>>)> = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let mut next_field = |what: &str| -> Result<&str, FormatError> {
            fields.next().map(str::trim).ok_or_else(|| FormatError::Csv {
                line: line_no,
                what: format!("missing {what} column"),
            })
        };
        let trial: usize = next_field("trial")?.parse().map_err(|_| FormatError::Csv {
            line: line_no,
            what: "trial index is not an integer".into(),
        })?;
        let label: i64 = next_field("label")?.parse().map_err(|_| FormatError::Csv {
            line: line_no,
            what: "label is not an integer".into(),
        })?;
        if label != 1 && label != 2 {
            return Err(FormatError::Csv {
                line: line_no,
                what: format!("label {label} is not 1 or 2"),
            });
        }
        let samples: Vec<f64> = fields
            .map(|f| {
                f.trim().parse().map_err(|_| FormatError::Csv {
                    line: line_no,
                    what: format!("sample {f:?} is not a number"),
                })
            })
            .collect::<Result<_, _>>()?;
        if samples.is_empty() {
            return Err(FormatError::Csv {
                line: line_no,
                what: "row has no sample columns".into(),
            });
        }

        if trial == trials.len() {
            trials.push((label as Label, vec![samples]));
        } else if trial + 1 == trials.len() {
            let (trial_label, channels) = trials.last_mut().unwrap();
            if *trial_label != label as Label {
                return Err(FormatError::Csv {
                    line: line_no,
                    what: format!("trial {trial} has conflicting labels"),
                });
            }
            if channels[0].len() != samples.len() {
                return Err(FormatError::Csv {
                    line: line_no,
                    what: format!(
                        "trial {trial} rows disagree on sample count ({} vs {})",
                        channels[0].len(),
                        samples.len()
                    ),
                });
            }
            channels.push(samples);
        } else {
            return Err(FormatError::Csv {
                line: line_no,
                what: format!("trial indices must be contiguous; got {trial}"),
            });
        }
    }

    if trials.is_empty() {
        return Err(FormatError::Csv {
            line: 0,
            what: "no data rows".into(),
        });
    }
    let n_channels = trials[0].1.len();
    let n_samples = trials[0].1[0].len();
    for (t, (_, channels)) in trials.iter().enumerate() {
        if channels.len() != n_channels {
            return Err(FormatError::Csv {
                line: 0,
                what: format!(
                    "trial {t} has {} channel rows, expected {n_channels}",
                    channels.len()
                ),
            });
        }
    }

    let mut data = Vec::with_capacity(trials.len() * n_channels * n_samples);
    let mut labels = Vec::with_capacity(trials.len());
    for (label, channels) in &trials {
        for channel in channels {
            data.extend_from_slice(channel);
        }
        labels.push(*label);
    }
    let channel_names = (0..n_channels).map(|i| format!("ch{i:02}")).collect();
    Ok(EpochSet::new(
        trials.len(),
        n_channels,
        n_samples,
        fs,
        data,
        labels,
        channel_names,
        subject_id.to_string(),
    )?)
}

pub fn read_epochs_csv(path: &Path, fs: f64, subject_id: &str) -> Result<EpochSet, FormatError> {
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_epochs_csv(&text, fs, subject_id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sphera_core::rng::CounterRng;

    fn sample_set(seed: u64) -> EpochSet {
        let mut rng = CounterRng::new(seed);
        let (trials, channels, samples) = (4, 3, 10);
        // f32-representable values so the binary round-trip is exact
        let data: Vec<f64> = (0..trials * channels * samples)
            .map(|_| rng.next_gaussian() as f32 as f64)
            .collect();
        EpochSet::new(
            trials,
            channels,
            samples,
            250.0,
            data,
            vec![1, 2, 1, 2],
            vec!["C3".into(), "Cz".into(), "C4".into()],
            "s01".into(),
        )
        .unwrap()
    }

    #[test]
    fn epoch_round_trip_is_bit_exact() {
        let set = sample_set(3);
        let bytes = epochs_to_bytes(&set);
        let back = epochs_from_bytes(&bytes).unwrap();
        assert_eq!(set, back);
        assert_eq!(bytes, epochs_to_bytes(&back));
    }

    #[test]
    fn short_payload_is_an_error() {
        let set = sample_set(4);
        let mut bytes = epochs_to_bytes(&set);
        bytes.truncate(bytes.len() - 4);
        assert!(matches!(
            epochs_from_bytes(&bytes),
            Err(FormatError::PayloadSizeMismatch { .. })
        ));
        // trailing garbage is rejected too
        let mut bytes = epochs_to_bytes(&set);
        bytes.extend_from_slice(&[0, 0, 0, 0]);
        assert!(matches!(
            epochs_from_bytes(&bytes),
            Err(FormatError::PayloadSizeMismatch { .. })
        ));
    }

    #[test]
    fn bad_label_in_file_is_rejected() {
        let set = sample_set(5);
        let bytes = epochs_to_bytes(&set);
        let text = String::from_utf8_lossy(&bytes[..bytes.iter().position(|&b| b == b'\n').unwrap()])
            .replace("[1,2,1,2]", "[1,3,1,2]");
        let mut forged = text.into_bytes();
        forged.push(b'\n');
        forged.extend_from_slice(&bytes[bytes.iter().position(|&b| b == b'\n').unwrap() + 1..]);
        assert!(matches!(
            epochs_from_bytes(&forged),
            Err(FormatError::Epoch(EpochError::InvalidLabel { label: 3, .. }))
        ));
    }

    #[test]
    fn csv_import_matches_layout() {
        let text = "0,1,1.0,2.0,3.0\n0,1,4.0,5.0,6.0\n1,2,7.0,8.0,9.0\n1,2,10.0,11.0,12.0\n";
        let set = parse_epochs_csv(text, 128.0, "csvsub").unwrap();
        assert_eq!(set.n_trials, 2);
        assert_eq!(set.n_channels, 2);
        assert_eq!(set.n_samples, 3);
        assert_eq!(set.labels, vec![1, 2]);
        assert_eq!(set.channel(0, 1), &[4.0, 5.0, 6.0]);
        assert_eq!(set.channel(1, 0), &[7.0, 8.0, 9.0]);
    }

    #[test]
    fn csv_rejects_bad_rows() {
        assert!(matches!(
            parse_epochs_csv("0,7,1.0,2.0\n", 100.0, "s"),
            Err(FormatError::Csv { line: 1, .. })
        ));
        assert!(matches!(
            parse_epochs_csv("0,1,1.0\n2,1,1.0\n", 100.0, "s"),
            Err(FormatError::Csv { line: 2, .. })
        ));
        assert!(matches!(
            parse_epochs_csv("0,1,1.0\n0,2,2.0\n", 100.0, "s"),
            Err(FormatError::Csv { line: 2, .. })
        ));
        assert!(matches!(
            parse_epochs_csv("0,1,1.0,2.0\n0,1,3.0\n", 100.0, "s"),
            Err(FormatError::Csv { line: 2, .. })
        ));
    }

    #[test]
    fn model_round_trips() {
        use sphera_core::synth::sample_mixed_sources;
        let (set, _) = sample_mixed_sources(4, 100, 10, &[4.0, 1.0, 1.0, 1.0], &[1.0, 4.0, 1.0, 1.0], 8);
        let csp = sphera_core::csp::fit_csp(&set, 2).unwrap();
        let back = csp_model_from_bytes(&csp_model_to_bytes(&csp)).unwrap();
        assert_eq!(csp.selected_rows, back.selected_rows);
        assert_eq!(csp.m, back.m);
        // f32 storage: equal after one quantization pass
        let requantized: Vec<f64> = csp.w_full.data().iter().map(|&v| v as f32 as f64).collect();
        assert_eq!(back.w_full.data(), &requantized[..]);

        let fm = sphera_core::csp::transform_set(&csp, &set).unwrap();
        let spa = SpaModel::new(fm, 8, 1).unwrap();
        let back = spa_model_from_bytes(&spa_model_to_bytes(&spa)).unwrap();
        assert_eq!((back.k, back.p), (spa.k, spa.p));
        assert_eq!(back.train.labels, spa.train.labels);
        assert_eq!(back.train.n, spa.train.n);
    }
}
