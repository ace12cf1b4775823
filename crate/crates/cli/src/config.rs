//! Pipeline configuration: defaults, JSON config files, flag overrides, and
//! the environment seed override, merged in that order.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use lrpeeg::{LrpConfig, RelevanceTarget, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Which classifier the pipeline trains and evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelChoice {
    /// Spatial-filter log-variance features into a shrinkage LDA.
    #[default]
    CspLda,
    /// Two-layer tanh network on vectorized envelope epochs.
    Dnn,
    /// The network, trained sequentially across subjects and averaged over
    /// subject-order permutations.
    DnnTransfer,
}

/// Evaluation protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    /// Train on one set, score on a separate untouched set.
    #[default]
    Holdout,
    /// One fold per trial, trained on the rest.
    LeaveOneOut,
}

/// How far preprocessing goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PreprocessMode {
    /// Full chain: decimate, bandpass, epoch, envelope, baseline — the
    /// network's input representation.
    #[default]
    Dnn,
    /// Stop after epoch extraction: band-limited oscillations for spatial
    /// filtering.
    Csp,
}

/// Network optimizer settings (the seed comes from the root seed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct TrainParams {
    /// Trials per gradient step, drawn uniformly with replacement.
    pub batch_size: usize,
    /// Number of batch updates.
    pub iterations: usize,
    /// Plain gradient-descent step size.
    pub learning_rate: f64,
}

impl Default for TrainParams {
    fn default() -> Self {
        let base = TrainConfig::new(0);
        Self {
            batch_size: base.batch_size,
            iterations: base.iterations,
            learning_rate: base.learning_rate,
        }
    }
}

impl TrainParams {
    /// Binds the optimizer settings to a derived seed.
    pub fn with_seed(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            batch_size: self.batch_size,
            iterations: self.iterations,
            learning_rate: self.learning_rate,
            seed,
        }
    }
}

/// Complete pipeline configuration. Every field has a protocol default, can
/// be set in a JSON config file, and can be overridden by the matching
/// command-line flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct PipelineConfig {
    /// Continuous recording (ERF) consumed by `preprocess`.
    pub recording: Option<PathBuf>,
    /// Epoch set (ERF): output of `preprocess`, input to `train`,
    /// `evaluate`, and `explain`.
    pub epochs: Option<PathBuf>,
    /// Held-out epoch set scored in holdout and transfer evaluation.
    pub test_epochs: Option<PathBuf>,
    /// One epoch set per training subject for the transfer protocol.
    pub transfer_epochs: Vec<PathBuf>,
    /// Where `train` saves the fitted model and `explain` loads it from.
    pub model_path: Option<PathBuf>,
    /// Directory for metrics, relevance files, and images.
    pub out_dir: PathBuf,

    /// Bandpass corner frequencies in Hz.
    pub band_hz: [f64; 2],
    /// Epoch window relative to each cue, in ms (inclusive endpoints).
    pub epoch_window_ms: [f64; 2],
    /// Baseline window relative to each cue, in ms.
    pub baseline_window_ms: [f64; 2],
    /// Sampling rate after decimation, Hz.
    pub target_fs: f64,
    /// Marker labels mapped to classes 0 and 1.
    pub classes: [i32; 2],
    /// How far the preprocessing chain runs.
    pub preprocess_mode: PreprocessMode,

    /// Classifier choice.
    pub model: ModelChoice,
    /// Spatial filter pairs kept by the CSP decomposition.
    pub n_pairs: usize,
    /// Network optimizer settings.
    pub train: TrainParams,
    /// Relevance propagation settings.
    pub lrp: LrpConfig,
    /// Evaluation protocol for `evaluate`.
    pub eval_mode: EvalMode,
    /// Subject-order permutations averaged in transfer evaluation.
    pub n_orders: usize,
    /// Root seed; all randomness in every subcommand derives from it.
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            recording: None,
            epochs: None,
            test_epochs: None,
            transfer_epochs: Vec::new(),
            model_path: None,
            out_dir: PathBuf::from("out"),
            band_hz: [9.0, 13.0],
            epoch_window_ms: [1000.0, 4000.0],
            baseline_window_ms: [-300.0, 0.0],
            target_fs: 100.0,
            classes: [0, 1],
            preprocess_mode: PreprocessMode::default(),
            model: ModelChoice::default(),
            n_pairs: 3,
            train: TrainParams::default(),
            lrp: LrpConfig::default(),
            eval_mode: EvalMode::default(),
            n_orders: lrpeeg::TRANSFER_ORDERS,
            seed: 0,
        }
    }
}

/// Command-line overrides; every flag mirrors a [`PipelineConfig`] field and
/// wins over the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Continuous recording (ERF) to preprocess.
    #[arg(long, global = true)]
    pub recording: Option<PathBuf>,
    /// Epoch set (ERF) to train/evaluate/explain on, or to write.
    #[arg(long, global = true)]
    pub epochs: Option<PathBuf>,
    /// Held-out epoch set for holdout and transfer evaluation.
    #[arg(long, global = true)]
    pub test_epochs: Option<PathBuf>,
    /// Comma-separated epoch sets, one per transfer training subject.
    #[arg(long, global = true, value_delimiter = ',')]
    pub transfer_epochs: Option<Vec<PathBuf>>,
    /// Model file to save (train) or load (explain).
    #[arg(long, global = true)]
    pub model_path: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Bandpass corners as `low,high` in Hz.
    #[arg(long, global = true, value_delimiter = ',', num_args = 2)]
    pub band_hz: Option<Vec<f64>>,
    /// Epoch window as `start,end` in ms relative to the cue.
    #[arg(long, global = true, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
    pub epoch_window_ms: Option<Vec<f64>>,
    /// Baseline window as `start,end` in ms relative to the cue.
    #[arg(long, global = true, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
    pub baseline_window_ms: Option<Vec<f64>>,
    /// Sampling rate after decimation, Hz.
    #[arg(long, global = true)]
    pub target_fs: Option<f64>,
    /// Marker labels mapped to classes 0 and 1, as `a,b`.
    #[arg(long, global = true, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
    pub classes: Option<Vec<i32>>,
    /// Preprocessing depth.
    #[arg(long, global = true, value_enum)]
    pub preprocess_mode: Option<PreprocessMode>,
    /// Classifier choice.
    #[arg(long, global = true, value_enum)]
    pub model: Option<ModelChoice>,
    /// Spatial filter pairs kept by CSP.
    #[arg(long, global = true)]
    pub n_pairs: Option<usize>,
    /// Trials per gradient step.
    #[arg(long, global = true)]
    pub batch_size: Option<usize>,
    /// Gradient steps to run.
    #[arg(long, global = true)]
    pub iterations: Option<usize>,
    /// Gradient-descent step size.
    #[arg(long, global = true)]
    pub learning_rate: Option<f64>,
    /// Relevance denominator stabilizer.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Which class output relevance explains.
    #[arg(long, global = true, value_enum)]
    pub lrp_target: Option<LrpTargetFlag>,
    /// Evaluation protocol.
    #[arg(long, global = true, value_enum)]
    pub eval_mode: Option<EvalMode>,
    /// Subject-order permutations in transfer evaluation.
    #[arg(long, global = true)]
    pub n_orders: Option<usize>,
    /// Root seed (the LRPEEG_SEED environment variable overrides this too).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

/// Flag-friendly spelling of the relevance target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LrpTargetFlag {
    PredictedClass,
    Class0,
    Class1,
}

impl From<LrpTargetFlag> for RelevanceTarget {
    fn from(flag: LrpTargetFlag) -> Self {
        match flag {
            LrpTargetFlag::PredictedClass => RelevanceTarget::PredictedClass,
            LrpTargetFlag::Class0 => RelevanceTarget::Class0,
            LrpTargetFlag::Class1 => RelevanceTarget::Class1,
        }
    }
}

fn pair<T: Copy>(v: &Option<Vec<T>>) -> Option<[T; 2]> {
    v.as_ref().map(|v| [v[0], v[1]])
}

/// Builds the effective configuration: defaults, then the JSON config file,
/// then flags, then the `LRPEEG_SEED` environment variable.
pub fn resolve_config(
    config_path: Option<&Path>,
    overrides: &Overrides,
) -> Result<PipelineConfig, CliError> {
    let mut cfg = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read config file '{}': {e}", path.display()))
            })?;
            let mut de = serde_json::Deserializer::from_str(&text);
            serde_path_to_error::deserialize(&mut de).map_err(|e| {
                CliError::Config(format!(
                    "config file '{}': field '{}': {}",
                    path.display(),
                    e.path(),
                    e.inner()
                ))
            })?
        }
        None => PipelineConfig::default(),
    };

    let o = overrides;
    cfg.recording = o.recording.clone().or(cfg.recording);
    cfg.epochs = o.epochs.clone().or(cfg.epochs);
    cfg.test_epochs = o.test_epochs.clone().or(cfg.test_epochs);
    if let Some(paths) = &o.transfer_epochs {
        cfg.transfer_epochs = paths.clone();
    }
    cfg.model_path = o.model_path.clone().or(cfg.model_path);
    if let Some(dir) = &o.out_dir {
        cfg.out_dir = dir.clone();
    }
    cfg.band_hz = pair(&o.band_hz).unwrap_or(cfg.band_hz);
    cfg.epoch_window_ms = pair(&o.epoch_window_ms).unwrap_or(cfg.epoch_window_ms);
    cfg.baseline_window_ms = pair(&o.baseline_window_ms).unwrap_or(cfg.baseline_window_ms);
    cfg.target_fs = o.target_fs.unwrap_or(cfg.target_fs);
    cfg.classes = pair(&o.classes).unwrap_or(cfg.classes);
    cfg.preprocess_mode = o.preprocess_mode.unwrap_or(cfg.preprocess_mode);
    cfg.model = o.model.unwrap_or(cfg.model);
    cfg.n_pairs = o.n_pairs.unwrap_or(cfg.n_pairs);
    cfg.train.batch_size = o.batch_size.unwrap_or(cfg.train.batch_size);
    cfg.train.iterations = o.iterations.unwrap_or(cfg.train.iterations);
    cfg.train.learning_rate = o.learning_rate.unwrap_or(cfg.train.learning_rate);
    cfg.lrp.epsilon = o.epsilon.unwrap_or(cfg.lrp.epsilon);
    if let Some(target) = o.lrp_target {
        cfg.lrp.target = target.into();
    }
    cfg.eval_mode = o.eval_mode.unwrap_or(cfg.eval_mode);
    cfg.n_orders = o.n_orders.unwrap_or(cfg.n_orders);
    cfg.seed = o.seed.unwrap_or(cfg.seed);

    if let Ok(value) = std::env::var("LRPEEG_SEED") {
        cfg.seed = value.parse().map_err(|_| {
            CliError::Config(format!(
                "LRPEEG_SEED must be an unsigned integer, got '{value}'"
            ))
        })?;
    }
    Ok(cfg)
}

/// Returns `path` if the file exists, or the exit-2 config error naming it.
pub fn require_file<'a>(path: &'a Option<PathBuf>, field: &str) -> Result<&'a Path, CliError> {
    let path = path
        .as_deref()
        .ok_or_else(|| CliError::Config(format!("missing required path: --{field}")))?;
    if !path.is_file() {
        return Err(CliError::Config(format!(
            "input file '{}' (--{field}) does not exist",
            path.display()
        )));
    }
    Ok(path)
}
