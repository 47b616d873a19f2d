//! The `sphera` command line: convert recordings, design filters, and run
//! reproducible classification experiments.
//!
//! Configuration precedence: built-in defaults, then the `--config` TOML
//! file, then the `SPHERA_OUT_DIR` environment variable (output directory
//! only), then explicit flags. Every experiment writes a `manifest.toml`
//! with the fully resolved configuration; running again from that manifest
//! reproduces the outputs byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use sphera_core::epochs::{drop_channels, epochs_from_events, EpochSet, LABEL_CLASS1, LABEL_CLASS2};
use sphera_core::eval::{
    kfold_cv_with, render_runs_csv, render_summary_csv, render_text_table, subsample_experiment_with,
    EvalError, EvalReport, ExperimentOptions,
};
use sphera_core::filter::{design_butterworth_bandpass, extract_window, magnitude_response, preprocess_set, BandpassSpec};
use sphera_core::rng::derive_stream;
use sphera_core::split::SplitError;
use sphera_core::synth::sample_two_manifolds;

use crate::bench::{bench_manifolds, render_bench_csv, synth_bench};
use crate::config::{ConfigError, RunConfig, UNIMPLEMENTED_METHODS};
use crate::format::{read_epochs_binary, read_epochs_csv, write_epochs_binary, write_features, FormatError};
use crate::gdf::{read_gdf_restricted, GdfError};
use crate::runner::ThreadedRunner;

/// Errors split by exit code: 2 for usage and validation problems,
/// 3 for failures inside a running pipeline.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Pipeline(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Pipeline(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Pipeline(m) => m,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}
impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Usage(e.to_string())
    }
}
impl From<GdfError> for CliError {
    fn from(e: GdfError) -> Self {
        CliError::Usage(e.to_string())
    }
}
impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        // parameter/data mismatches are usage errors; failures inside a
        // fold are pipeline errors
        match &e {
            EvalError::Split(SplitError::InfeasibleFraction { .. })
            | EvalError::Split(SplitError::ClassSmallerThanFolds { .. })
            | EvalError::Split(SplitError::BadFoldCount { .. })
            | EvalError::IncompatiblePipeline { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Pipeline(e.to_string()),
        }
    }
}

fn io_pipeline(path: &Path, source: std::io::Error) -> CliError {
    CliError::Pipeline(format!("io error on {}: {source}", path.display()))
}

#[derive(Parser)]
#[command(
    name = "sphera",
    version,
    about = "Two-class motor-imagery EEG classification: CSP features, a sphere-fitting local manifold classifier, Riemannian baselines, and a reproducible experiment harness."
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a GDF recording (or epoch CSV) into the epoch binary format.
    Convert(ConvertArgs),
    /// Design the Butterworth band-pass and emit coefficient/response CSVs.
    FilterDesign(FilterDesignArgs),
    /// Stratified k-fold cross-validation of the configured methods.
    Cv(ExperimentArgs),
    /// Small-training-set subsampling experiment (learning curves).
    Smallset(ExperimentArgs),
    /// Synthetic two-manifold benchmark of the sphere classifier.
    SynthBench(SynthBenchArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML key-value configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (also settable via SPHERA_OUT_DIR).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Master seed for every random draw.
    #[arg(long)]
    seed: Option<u64>,
}

impl CommonArgs {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Ok(dir) = std::env::var("SPHERA_OUT_DIR") {
            cfg.output_dir = PathBuf::from(dir);
        }
        if let Some(dir) = &self.out_dir {
            cfg.output_dir = dir.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct ConvertArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Input recording: GDF by default, CSV with --csv or a .csv extension.
    /// Falls back to the first `inputs` entry of the config file.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output epoch file (default: <out_dir>/<subject>.epochs).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Treat the input as CSV (trial,label,samples... rows).
    #[arg(long)]
    csv: bool,
    /// Sampling rate for CSV inputs, which carry none.
    #[arg(long)]
    fs: Option<f64>,
    /// Subject identifier (default: input file stem).
    #[arg(long)]
    subject: Option<String>,
    /// Cue event mapping "code=label", repeatable; replaces the config map.
    #[arg(long = "cue-code")]
    cue_codes: Vec<String>,
    /// Cue-locked segment "t0:t1" in seconds relative to the cue.
    #[arg(long)]
    segment: Option<String>,
    /// Channel name to drop, repeatable.
    #[arg(long = "drop")]
    drop_names: Vec<String>,
    /// Drop channels whose name starts with this prefix, repeatable;
    /// replaces the config prefixes (default EOG).
    #[arg(long = "drop-prefix")]
    drop_prefixes: Vec<String>,
    /// Keep every channel (ignore configured drops).
    #[arg(long)]
    keep_all: bool,
}

#[derive(Args)]
struct FilterDesignArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Band edges "low:high" in Hz.
    #[arg(long)]
    band: Option<String>,
    /// Analog prototype order.
    #[arg(long)]
    order: Option<usize>,
    /// Sampling rate in Hz.
    #[arg(long)]
    fs: Option<f64>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Epoch binary file; repeat to pool several recordings.
    #[arg(long)]
    input: Vec<PathBuf>,
    /// Comma-separated method list (csp+spa, csp+lda, mdrm, ts+lda;
    /// csp+svm and ts+svm are reported as not implemented).
    #[arg(long)]
    methods: Option<String>,
    /// Cross-validation fold count (cv only).
    #[arg(long)]
    folds: Option<usize>,
    /// Training fractions "1/2,1/6" (smallset only).
    #[arg(long)]
    fractions: Option<String>,
    /// Replicates per fraction (smallset only).
    #[arg(long)]
    replicates: Option<usize>,
    /// Worker threads for folds/replicates.
    #[arg(long)]
    threads: Option<usize>,
    /// CSP filter pairs m.
    #[arg(long)]
    pairs: Option<usize>,
    /// Band edges "low:high" in Hz, or "none" to skip filtering.
    #[arg(long)]
    band: Option<String>,
    /// Analysis window "t0:t1" in seconds, or "none" to keep whole epochs.
    #[arg(long)]
    window: Option<String>,
    /// Hyperparameter selection: inner_cv or oracle_on_eval.
    #[arg(long)]
    protocol: Option<String>,
    /// Leakage instrumentation: poison test rows with NaN during fits.
    #[arg(long)]
    poison_check: bool,
    /// Subject name for the report (default: from the first input).
    #[arg(long)]
    subject: Option<String>,
}

#[derive(Args)]
struct SynthBenchArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Training points per class, comma-separated.
    #[arg(long)]
    n: Option<String>,
    /// Noise standard deviations, comma-separated.
    #[arg(long)]
    sigma: Option<String>,
    /// Neighborhood size k.
    #[arg(long)]
    k: Option<usize>,
    /// Manifold dimension p.
    #[arg(long)]
    p: Option<usize>,
    /// Ambient dimension of the embedding.
    #[arg(long)]
    ambient_dim: Option<usize>,
    /// Held-out test points per class.
    #[arg(long)]
    n_test: Option<usize>,
    /// Also write each cell's training set in the feature binary format.
    #[arg(long)]
    dump_data: bool,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_range(text: &str, what: &str) -> Result<[f64; 2], CliError> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("{what} {text:?} is not low:high")))?;
    let lo: f64 = a
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{what} bound {a:?} is not a number")))?;
    let hi: f64 = b
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{what} bound {b:?} is not a number")))?;
    Ok([lo, hi])
}

fn parse_optional_range(text: &str, what: &str) -> Result<Option<[f64; 2]>, CliError> {
    if text.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        parse_range(text, what).map(Some)
    }
}

fn comma_list(text: &str) -> Vec<String> {
    text.split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

fn ensure_out_dir(cfg: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&cfg.output_dir).map_err(|e| io_pipeline(&cfg.output_dir, e))
}

fn write_output(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| io_pipeline(path, e))
}

impl Cli {
    pub fn execute(self) -> Result<(), CliError> {
        match self.command {
            Command::Convert(args) => cmd_convert(args),
            Command::FilterDesign(args) => cmd_filter_design(args),
            Command::Cv(args) => cmd_cv(args),
            Command::Smallset(args) => cmd_smallset(args),
            Command::SynthBench(args) => cmd_synth_bench(args),
        }
    }
}

pub fn run() -> Result<(), CliError> {
    Cli::parse().execute()
}

fn cmd_convert(args: ConvertArgs) -> Result<(), CliError> {
    let mut cfg = args.common.resolve()?;
    if let Some(fs_flag) = args.fs {
        cfg.csv_fs = fs_flag;
    }
    if !args.cue_codes.is_empty() {
        cfg.cue_codes = args.cue_codes.clone();
    }
    if let Some(segment) = &args.segment {
        cfg.segment = parse_range(segment, "segment")?;
    }
    if !args.drop_prefixes.is_empty() {
        cfg.drop_prefixes = args.drop_prefixes.clone();
    }
    cfg.drop_channels.extend(args.drop_names.iter().cloned());
    if args.keep_all {
        cfg.drop_channels.clear();
        cfg.drop_prefixes.clear();
    }
    if let Some(input) = &args.input {
        cfg.inputs = vec![input.clone()];
    }

    let input = cfg
        .inputs
        .first()
        .cloned()
        .ok_or_else(|| CliError::Usage("no input file given".into()))?;
    if !input.exists() {
        return Err(CliError::Usage(format!(
            "input file {} does not exist",
            input.display()
        )));
    }
    let subject = args
        .subject
        .clone()
        .or(cfg.subject.clone())
        .unwrap_or_else(|| {
            input
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "unknown".into())
        });
    cfg.subject = Some(subject.clone());

    let is_csv = args.csv || input.extension().is_some_and(|e| e == "csv");
    let epochs = if is_csv {
        read_epochs_csv(&input, cfg.csv_fs, &subject)?
    } else {
        let recording = read_gdf_restricted(&input)?;
        let cue_map = cfg.cue_code_pairs()?;
        epochs_from_events(
            &recording,
            &cue_map,
            (cfg.segment[0], cfg.segment[1]),
            &subject,
        )
        .map_err(|e| CliError::Usage(e.to_string()))?
    };

    // resolve prefix drops against the actual channel list
    let mut to_drop: Vec<String> = cfg.drop_channels.clone();
    for name in &epochs.channel_names {
        if cfg.drop_prefixes.iter().any(|p| name.starts_with(p.as_str()))
            && !to_drop.contains(name)
        {
            to_drop.push(name.clone());
        }
    }
    let to_drop: Vec<&str> = to_drop.iter().map(String::as_str).collect();
    let epochs = drop_channels(&epochs, &to_drop).map_err(|e| CliError::Usage(e.to_string()))?;

    ensure_out_dir(&cfg)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| cfg.output_dir.join(format!("{subject}.epochs")));
    write_epochs_binary(&epochs, &out).map_err(|e| CliError::Pipeline(e.to_string()))?;
    cfg.write_manifest(&cfg.output_dir)?;

    println!(
        "{}: {} trials ({} class-1 / {} class-2), {} channels, {} samples @ {} Hz -> {}",
        subject,
        epochs.n_trials,
        epochs.class_count(LABEL_CLASS1),
        epochs.class_count(LABEL_CLASS2),
        epochs.n_channels,
        epochs.n_samples,
        epochs.fs,
        out.display()
    );
    Ok(())
}

fn cmd_filter_design(args: FilterDesignArgs) -> Result<(), CliError> {
    let mut cfg = args.common.resolve()?;
    if let Some(band) = &args.band {
        cfg.band = Some(parse_range(band, "band")?);
    }
    if let Some(order) = args.order {
        cfg.filter_order = order;
    }
    if let Some(fs) = args.fs {
        cfg.csv_fs = fs;
    }
    let fs = cfg.csv_fs;
    let [low, high] = cfg
        .band
        .ok_or_else(|| CliError::Usage("filter-design needs a band".into()))?;

    let spec = BandpassSpec::new(low, high, cfg.filter_order, fs)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let cascade = design_butterworth_bandpass(&spec).map_err(|e| CliError::Usage(e.to_string()))?;

    let mut coeffs = String::from("section,b0,b1,b2,a1,a2,gain\r\n");
    for (i, s) in cascade.sections.iter().enumerate() {
        coeffs.push_str(&format!(
            "{i},{},{},{},{},{},{}\r\n",
            s.b0, s.b1, s.b2, s.a1, s.a2, cascade.gain
        ));
    }
    let mut response = String::from("f_hz,magnitude_db\r\n");
    let mut f = 0.0;
    while f < fs / 2.0 {
        response.push_str(&format!("{f},{:.6}\r\n", magnitude_response(&cascade, f, fs)));
        f += 0.25;
    }

    ensure_out_dir(&cfg)?;
    let coeff_path = cfg.output_dir.join("filter_coefficients.csv");
    let resp_path = cfg.output_dir.join("filter_response.csv");
    write_output(&coeff_path, &coeffs)?;
    write_output(&resp_path, &response)?;
    cfg.write_manifest(&cfg.output_dir)?;
    println!(
        "band-pass {low}-{high} Hz order {} at {fs} Hz: {} sections, {:.3} dB at {low} Hz, {:.3} dB at {high} Hz",
        cfg.filter_order,
        cascade.sections.len(),
        magnitude_response(&cascade, low, fs),
        magnitude_response(&cascade, high, fs),
    );
    println!("wrote {} and {}", coeff_path.display(), resp_path.display());
    Ok(())
}

fn apply_experiment_flags(cfg: &mut RunConfig, args: &ExperimentArgs) -> Result<(), CliError> {
    if !args.input.is_empty() {
        cfg.inputs = args.input.clone();
    }
    if let Some(methods) = &args.methods {
        cfg.methods = comma_list(methods);
    }
    if let Some(folds) = args.folds {
        cfg.folds = folds;
    }
    if let Some(fractions) = &args.fractions {
        cfg.fractions = comma_list(fractions);
    }
    if let Some(replicates) = args.replicates {
        cfg.replicates = replicates;
    }
    if let Some(threads) = args.threads {
        cfg.threads = threads;
    }
    if let Some(pairs) = args.pairs {
        cfg.csp_pairs = pairs;
    }
    if let Some(band) = &args.band {
        cfg.band = parse_optional_range(band, "band")?;
    }
    if let Some(window) = &args.window {
        cfg.window = parse_optional_range(window, "window")?;
    }
    if let Some(protocol) = &args.protocol {
        cfg.protocol = protocol.clone();
    }
    if args.poison_check {
        cfg.poison_check = true;
    }
    if args.subject.is_some() {
        cfg.subject = args.subject.clone();
    }
    Ok(())
}

/// Load, pool, band-pass, and window the configured epoch files.
fn load_prepared(cfg: &RunConfig) -> Result<EpochSet, CliError> {
    if cfg.inputs.is_empty() {
        return Err(CliError::Usage("no input epoch files given".into()));
    }
    for path in &cfg.inputs {
        if !path.exists() {
            return Err(CliError::Usage(format!(
                "input file {} does not exist",
                path.display()
            )));
        }
    }
    let mut pooled: Option<EpochSet> = None;
    for path in &cfg.inputs {
        let set = read_epochs_binary(path)?;
        pooled = Some(match pooled {
            None => set,
            Some(mut acc) => {
                if set.n_channels != acc.n_channels
                    || set.n_samples != acc.n_samples
                    || set.fs != acc.fs
                {
                    return Err(CliError::Usage(format!(
                        "{} does not match the shape of the other inputs",
                        path.display()
                    )));
                }
                acc.data.extend_from_slice(&set.data);
                acc.labels.extend_from_slice(&set.labels);
                acc.n_trials += set.n_trials;
                if !set.subject_id.is_empty() && set.subject_id != acc.subject_id {
                    acc.subject_id = format!("{}+{}", acc.subject_id, set.subject_id);
                }
                acc
            }
        });
    }
    let mut set = pooled.expect("at least one input");
    if let Some(subject) = &cfg.subject {
        set.subject_id = subject.clone();
    }

    if let Some([low, high]) = cfg.band {
        let spec = BandpassSpec::new(low, high, cfg.filter_order, set.fs)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        set = preprocess_set(&set, &spec).map_err(|e| CliError::Pipeline(e.to_string()))?;
    }
    if let Some([t0, t1]) = cfg.window {
        set = extract_window(&set, t0, t1).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(set)
}

/// Rows for methods the harness names but does not provide.
fn unimplemented_rows(cfg: &RunConfig, subject: &str, split: &str) -> (String, String) {
    let mut csv = String::new();
    let mut names = Vec::new();
    for method in cfg.methods.iter().filter(|m| UNIMPLEMENTED_METHODS.contains(&m.as_str())) {
        csv.push_str(&format!("{subject},{method},{split},not-implemented,\r\n"));
        names.push(method.as_str());
    }
    let text = if names.is_empty() {
        String::new()
    } else {
        format!("not implemented: {}\n", names.join(", "))
    };
    (csv, text)
}

fn implemented_methods(cfg: &RunConfig) -> Vec<String> {
    cfg.methods
        .iter()
        .filter(|m| !UNIMPLEMENTED_METHODS.contains(&m.as_str()))
        .cloned()
        .collect()
}

fn write_experiment_outputs(
    cfg: &RunConfig,
    reports: &[EvalReport],
    split_label: &str,
    prefix: &str,
) -> Result<(), CliError> {
    ensure_out_dir(cfg)?;
    let subject = reports
        .first()
        .map(|r| r.subject.clone())
        .unwrap_or_default();
    let (extra_csv, extra_text) = unimplemented_rows(cfg, &subject, split_label);

    let mut summary = render_summary_csv(reports);
    summary.push_str(&extra_csv);
    let runs = render_runs_csv(reports);
    let mut table = render_text_table(reports);
    table.push_str(&extra_text);

    write_output(&cfg.output_dir.join(format!("{prefix}_summary.csv")), &summary)?;
    write_output(&cfg.output_dir.join(format!("{prefix}_runs.csv")), &runs)?;
    cfg.write_manifest(&cfg.output_dir)?;
    print!("{table}");
    Ok(())
}

fn cmd_cv(args: ExperimentArgs) -> Result<(), CliError> {
    let mut cfg = args.common.resolve()?;
    apply_experiment_flags(&mut cfg, &args)?;
    cfg.validate()?;
    let set = load_prepared(&cfg)?;

    let runner = ThreadedRunner::new(cfg.threads);
    let opts = ExperimentOptions {
        poison_check: cfg.poison_check,
    };
    let mut reports = Vec::new();
    for method in implemented_methods(&cfg) {
        let spec = cfg
            .pipeline_for(&method)?
            .expect("implemented methods have a pipeline");
        reports.push(kfold_cv_with(&runner, &set, &spec, cfg.folds, cfg.seed, &opts)?);
    }
    write_experiment_outputs(&cfg, &reports, &format!("cv{}", cfg.folds), "cv")
}

fn cmd_smallset(args: ExperimentArgs) -> Result<(), CliError> {
    let mut cfg = args.common.resolve()?;
    apply_experiment_flags(&mut cfg, &args)?;
    cfg.validate()?;
    let set = load_prepared(&cfg)?;
    let fractions = cfg.fraction_list()?;

    let runner = ThreadedRunner::new(cfg.threads);
    let opts = ExperimentOptions {
        poison_check: cfg.poison_check,
    };
    let mut reports = Vec::new();
    for method in implemented_methods(&cfg) {
        let spec = cfg
            .pipeline_for(&method)?
            .expect("implemented methods have a pipeline");
        reports.extend(subsample_experiment_with(
            &runner,
            &set,
            &spec,
            &fractions,
            cfg.replicates,
            cfg.seed,
            &opts,
        )?);
    }
    write_experiment_outputs(&cfg, &reports, "smallset", "smallset")
}

fn cmd_synth_bench(args: SynthBenchArgs) -> Result<(), CliError> {
    let mut cfg = args.common.resolve()?;
    if let Some(n) = &args.n {
        cfg.bench_n = comma_list(n)
            .iter()
            .map(|s| s.parse().map_err(|_| CliError::Usage(format!("bad n {s:?}"))))
            .collect::<Result<_, _>>()?;
    }
    if let Some(sigma) = &args.sigma {
        cfg.bench_sigma = comma_list(sigma)
            .iter()
            .map(|s| s.parse().map_err(|_| CliError::Usage(format!("bad sigma {s:?}"))))
            .collect::<Result<_, _>>()?;
    }
    if let Some(k) = args.k {
        cfg.bench_k = k;
    }
    if let Some(p) = args.p {
        cfg.bench_p = p;
    }
    if let Some(d) = args.ambient_dim {
        cfg.bench_ambient_dim = d;
    }
    if let Some(n_test) = args.n_test {
        cfg.bench_n_test = n_test;
    }
    if args.dump_data {
        cfg.bench_dump_data = true;
    }
    if let Some(threads) = args.threads {
        cfg.threads = threads;
    }

    let runner = ThreadedRunner::new(cfg.threads);
    let cells = synth_bench(&cfg, &runner).map_err(|e| CliError::Pipeline(e.to_string()))?;

    ensure_out_dir(&cfg)?;
    let csv = render_bench_csv(&cells);
    write_output(&cfg.output_dir.join("synth_bench.csv"), &csv)?;
    cfg.write_manifest(&cfg.output_dir)?;

    if cfg.bench_dump_data {
        let dir = cfg.output_dir.join("datasets");
        fs::create_dir_all(&dir).map_err(|e| io_pipeline(&dir, e))?;
        let (inner, outer) = bench_manifolds(&cfg);
        for (i, cell) in cells.iter().enumerate() {
            let cell_seed = derive_stream(cfg.seed, 0xBE7C ^ i as u64);
            let sample = sample_two_manifolds(
                &inner,
                &outer,
                cell.n_per_class,
                cell.sigma,
                derive_stream(cell_seed, 0),
            )
            .map_err(|e| CliError::Pipeline(e.to_string()))?;
            let path = dir.join(format!("n{}_sigma{}.features", cell.n_per_class, cell.sigma));
            write_features(&sample.features, &path).map_err(|e| CliError::Pipeline(e.to_string()))?;
        }
    }

    print!("{csv}");
    Ok(())
}
