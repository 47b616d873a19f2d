//! Run configuration: one flat key-value (TOML) file, overridable by
//! command-line flags. Every run writes the fully resolved configuration
//! back out as `manifest.toml`, so a manifest re-run reproduces the
//! outputs byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sphera_core::epochs::Label;
use sphera_core::eval::{ClassifierSpec, FeatureStage, Fraction, PipelineSpec};
use sphera_core::spa::{HyperparamGrid, TuneProtocol};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// TOML has no `null`, so optional ranges are stored as arrays: `[]` means
/// disabled, `[a, b]` means enabled. Keeps manifests lossless.
mod opt_range {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<[f64; 2]>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(r) => r.to_vec(),
            None => Vec::new(),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<[f64; 2]>, D::Error> {
        let v: Vec<f64> = Vec::deserialize(d)?;
        match v.len() {
            0 => Ok(None),
            2 => Ok(Some([v[0], v[1]])),
            n => Err(serde::de::Error::custom(format!(
                "expected 0 or 2 elements, got {n}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Filled automatically when a manifest is written.
    pub toolkit_version: Option<String>,

    pub inputs: Vec<PathBuf>,
    pub output_dir: PathBuf,
    pub subject: Option<String>,

    /// Event-code-to-class map as "code=label" entries, e.g. "769=1".
    /// The dataset defines these codes; they are configuration, not
    /// constants of the tool.
    pub cue_codes: Vec<String>,
    /// Cue-locked segment cut from the continuous recording, seconds
    /// relative to the cue.
    pub segment: [f64; 2],
    /// Analysis window in seconds relative to epoch start; None keeps the
    /// stored epochs as-is.
    #[serde(with = "opt_range")]
    pub window: Option<[f64; 2]>,
    /// Band-pass edges in Hz; None skips filtering.
    #[serde(with = "opt_range")]
    pub band: Option<[f64; 2]>,
    pub filter_order: usize,
    /// Filtering mode recorded in every manifest. Only "zero-phase"
    /// (forward-backward) exists today; a causal mode would reproduce
    /// online conditions.
    pub filter_mode: String,
    /// Sampling rate assumed for CSV imports (CSV carries none).
    pub csv_fs: f64,
    pub drop_channels: Vec<String>,
    /// Channels whose name starts with any of these are dropped.
    pub drop_prefixes: Vec<String>,

    pub csp_pairs: usize,
    pub grid_p: Vec<usize>,
    pub grid_k_min: usize,
    pub grid_k_max: usize,
    /// "inner_cv" or "oracle_on_eval" (the latter selects (k, p) on the
    /// test split and is watermarked in every report).
    pub protocol: String,
    pub folds: usize,
    pub fractions: Vec<String>,
    pub replicates: usize,
    pub seed: u64,
    pub methods: Vec<String>,
    pub threads: usize,
    pub lda_shrinkage: f64,
    pub ts_lda_shrinkage: f64,
    pub poison_check: bool,

    pub bench_n: Vec<usize>,
    pub bench_sigma: Vec<f64>,
    pub bench_ambient_dim: usize,
    pub bench_radii: [f64; 2],
    pub bench_k: usize,
    pub bench_p: usize,
    pub bench_n_test: usize,
    pub bench_dump_data: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            toolkit_version: None,
            inputs: Vec::new(),
            output_dir: PathBuf::from("sphera-out"),
            subject: None,
            cue_codes: vec!["769=1".into(), "770=2".into()],
            segment: [0.0, 4.0],
            window: Some([0.5, 2.5]),
            band: Some([8.0, 30.0]),
            filter_order: 5,
            filter_mode: "zero-phase".into(),
            csv_fs: 250.0,
            drop_channels: Vec::new(),
            drop_prefixes: vec!["EOG".into()],
            csp_pairs: 3,
            grid_p: vec![1, 2, 3, 4],
            grid_k_min: 8,
            grid_k_max: 46,
            protocol: "inner_cv".into(),
            folds: 10,
            fractions: vec!["1/2".into(), "1/3".into(), "1/6".into(), "1/12".into()],
            replicates: 20,
            seed: 42,
            methods: vec!["csp+spa".into(), "csp+lda".into(), "mdrm".into(), "ts+lda".into()],
            threads: 1,
            lda_shrinkage: 0.0,
            ts_lda_shrinkage: 0.05,
            poison_check: false,
            bench_n: vec![100, 500, 2000],
            bench_sigma: vec![0.0, 0.01, 0.1, 0.5],
            bench_ambient_dim: 10,
            bench_radii: [1.0, 3.0],
            bench_k: 20,
            bench_p: 1,
            bench_n_test: 500,
            bench_dump_data: false,
        }
    }
}

/// Methods named by the comparison harness but intentionally not provided.
pub const UNIMPLEMENTED_METHODS: [&str; 2] = ["csp+svm", "ts+svm"];

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(toml::from_str(&text)?)
    }

    /// Resolved configuration as a manifest, version included.
    pub fn manifest(&self) -> String {
        let mut stamped = self.clone();
        stamped.toolkit_version = Some(env!("CARGO_PKG_VERSION").to_string());
        toml::to_string_pretty(&stamped).expect("config is serializable")
    }

    pub fn write_manifest(&self, dir: &Path) -> Result<PathBuf, ConfigError> {
        let path = dir.join("manifest.toml");
        fs::write(&path, self.manifest()).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(path)
    }

    pub fn cue_code_pairs(&self) -> Result<Vec<(u16, Label)>, ConfigError> {
        self.cue_codes
            .iter()
            .map(|entry| {
                let (code, label) = entry
                    .split_once('=')
                    .ok_or_else(|| invalid(format!("cue code {entry:?} is not code=label")))?;
                let code: u16 = code
                    .trim()
                    .parse()
                    .map_err(|_| invalid(format!("cue code {code:?} is not a number")))?;
                let label: Label = label
                    .trim()
                    .parse()
                    .map_err(|_| invalid(format!("label {label:?} is not a number")))?;
                if label != 1 && label != 2 {
                    return Err(invalid(format!("label {label} must be 1 or 2")));
                }
                Ok((code, label))
            })
            .collect()
    }

    pub fn fraction_list(&self) -> Result<Vec<Fraction>, ConfigError> {
        self.fractions
            .iter()
            .map(|entry| {
                let (num, den) = entry
                    .split_once('/')
                    .ok_or_else(|| invalid(format!("fraction {entry:?} is not num/den")))?;
                let num: u32 = num
                    .trim()
                    .parse()
                    .map_err(|_| invalid(format!("fraction numerator {num:?}")))?;
                let den: u32 = den
                    .trim()
                    .parse()
                    .map_err(|_| invalid(format!("fraction denominator {den:?}")))?;
                if num == 0 || den == 0 {
                    return Err(invalid(format!("fraction {entry:?} must be positive")));
                }
                Ok(Fraction::new(num, den))
            })
            .collect()
    }

    pub fn tune_protocol(&self) -> Result<TuneProtocol, ConfigError> {
        match self.protocol.as_str() {
            "inner_cv" => Ok(TuneProtocol::InnerCv),
            "oracle_on_eval" => Ok(TuneProtocol::OracleOnEval),
            other => Err(invalid(format!(
                "protocol {other:?}; expected inner_cv or oracle_on_eval"
            ))),
        }
    }

    pub fn grid(&self) -> HyperparamGrid {
        HyperparamGrid {
            p_values: self.grid_p.clone(),
            k_min: self.grid_k_min,
            k_step: 1,
            k_max_cap: self.grid_k_max,
        }
    }

    /// Pipeline spec for a method name; `Ok(None)` marks a recognized but
    /// deliberately unimplemented baseline.
    pub fn pipeline_for(&self, method: &str) -> Result<Option<PipelineSpec>, ConfigError> {
        if UNIMPLEMENTED_METHODS.contains(&method) {
            return Ok(None);
        }
        let spec = match method {
            "csp+spa" => PipelineSpec::csp_spa(self.csp_pairs, self.grid(), self.tune_protocol()?),
            "csp+lda" => PipelineSpec::csp_lda(self.csp_pairs, self.lda_shrinkage),
            "mdrm" => PipelineSpec::mdrm(),
            "ts+lda" => PipelineSpec::ts_lda(self.ts_lda_shrinkage),
            "ts+spa" => PipelineSpec {
                features: FeatureStage::TangentSpace,
                classifier: ClassifierSpec::Spa {
                    grid: self.grid(),
                    protocol: self.tune_protocol()?,
                },
            },
            other => return Err(invalid(format!("unknown method {other:?}"))),
        };
        Ok(Some(spec))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.folds < 2 {
            return Err(invalid("folds must be >= 2"));
        }
        if self.csp_pairs == 0 {
            return Err(invalid("csp_pairs must be >= 1"));
        }
        if let Some([lo, hi]) = self.band {
            if !(lo > 0.0 && lo < hi) {
                return Err(invalid(format!("band [{lo}, {hi}] must satisfy 0 < low < high")));
            }
        }
        if let Some([t0, t1]) = self.window {
            if !(t1 > t0) {
                return Err(invalid(format!("window [{t0}, {t1}] must satisfy t0 < t1")));
            }
        }
        if self.filter_mode != "zero-phase" {
            return Err(invalid(format!(
                "filter_mode {:?}: only \"zero-phase\" is implemented",
                self.filter_mode
            )));
        }
        if self.methods.is_empty() {
            return Err(invalid("at least one method is required"));
        }
        for m in &self.methods {
            self.pipeline_for(m)?;
        }
        self.cue_code_pairs()?;
        self.fraction_list()?;
        self.tune_protocol()?;
        Ok(())
    }
}
