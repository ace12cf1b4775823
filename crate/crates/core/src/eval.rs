//! Model fitting and evaluation protocols: holdout, leave-one-out, and
//! sequential multi-subject transfer.
//!
//! Fitting never sees test data — each protocol constructs its training set
//! explicitly and calls [`fit`] on that alone, so holdout hygiene holds by
//! construction. All randomness derives from one root seed via labeled
//! stream splitting, which makes every protocol bitwise reproducible.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::csp::{class_covariances, csp_decompose, csp_features, SpatialFilterBank};
use crate::data::{vectorize_all, EpochSet};
use crate::error::{Error, Result};
use crate::mlp::{self, train_transfer, MlpModel, TrainConfig};
use crate::seeding::derive_seed;
use crate::slda::{lda_predict, lda_scores, lda_train, LdaModel};

/// Number of subject-order permutations averaged in transfer evaluation.
pub const TRANSFER_ORDERS: usize = 5;

/// Which classifier a protocol fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ModelSpec {
    /// Spatial-filter log-variance features into a shrinkage linear
    /// discriminant.
    CspLda { n_pairs: usize },
    /// Two-layer tanh network on vectorized trials.
    Dnn { train: TrainConfig },
}

/// A fitted classifier, ready to label new trials.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    CspLda {
        bank: SpatialFilterBank,
        lda: LdaModel,
    },
    Dnn { model: MlpModel },
}

/// Fits the chosen classifier on the given trials only.
pub fn fit(spec: &ModelSpec, train: &EpochSet) -> Result<TrainedModel> {
    match spec {
        ModelSpec::CspLda { n_pairs } => {
            let (s0, s1) = class_covariances(train)?;
            let bank = csp_decompose(&s0, &s1, *n_pairs)?;
            let features = csp_features(train, &bank)?;
            let lda = lda_train(&features, &train.labels)?;
            Ok(TrainedModel::CspLda { bank, lda })
        }
        ModelSpec::Dnn { train: cfg } => {
            let n_input = train.n_timepoints() * train.n_channels();
            let model = mlp::init_model(n_input, cfg.seed)?;
            let model = mlp::train(&model, train, cfg)?;
            Ok(TrainedModel::Dnn { model })
        }
    }
}

/// Labels and decision scores for every trial in a set. Scores are the
/// linear discriminant value for CSP-LDA and the class-1 probability for the
/// network; in both cases larger means "more class 1".
pub fn predict_set(model: &TrainedModel, epochs: &EpochSet) -> Result<(Vec<u8>, Vec<f64>)> {
    match model {
        TrainedModel::CspLda { bank, lda } => {
            let features = csp_features(epochs, bank)?;
            Ok((lda_predict(lda, &features)?, lda_scores(lda, &features)?))
        }
        TrainedModel::Dnn { model } => mlp::predict(model, epochs),
    }
}

/// One evaluation fold's bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    /// Fold index within the protocol.
    pub fold: usize,
    /// Trials the model was fitted on.
    pub n_train: usize,
    /// Trials it was scored on.
    pub n_test: usize,
    /// How many it got right.
    pub n_correct: usize,
    /// `n_correct / n_test`.
    pub accuracy: f64,
    /// Predicted label per test trial, in test-set order.
    pub predicted: Vec<u8>,
    /// True label per test trial, in test-set order.
    pub actual: Vec<u8>,
}

impl FoldOutcome {
    fn score(fold: usize, n_train: usize, predicted: Vec<u8>, actual: Vec<u8>) -> Self {
        let n_test = actual.len();
        let n_correct = predicted
            .iter()
            .zip(&actual)
            .filter(|(p, a)| p == a)
            .count();
        Self {
            fold,
            n_train,
            n_test,
            n_correct,
            accuracy: n_correct as f64 / n_test as f64,
            predicted,
            actual,
        }
    }
}

/// Full result of one evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    /// Protocol name: `holdout`, `leave-one-out`, or `transfer`.
    pub mode: String,
    /// Mean accuracy over folds.
    pub accuracy: f64,
    /// Per-fold outcomes, in protocol order.
    pub folds: Vec<FoldOutcome>,
}

fn summarize(mode: &str, folds: Vec<FoldOutcome>) -> EvalMetrics {
    let accuracy = folds.iter().map(|f| f.accuracy).sum::<f64>() / folds.len().max(1) as f64;
    EvalMetrics {
        mode: mode.to_string(),
        accuracy,
        folds,
    }
}

/// Fits on `train`, scores on `test`. The test set is never touched during
/// fitting.
pub fn run_holdout(
    spec: &ModelSpec,
    train: &EpochSet,
    test: &EpochSet,
) -> Result<(EvalMetrics, TrainedModel)> {
    let model = fit(spec, train)?;
    let (predicted, _) = predict_set(&model, test)?;
    let outcome = FoldOutcome::score(0, train.n_trials(), predicted, test.labels.clone());
    Ok((summarize("holdout", vec![outcome]), model))
}

/// Leave-one-out cross-validation: one fold per trial, fitted on the other
/// `n − 1` trials and scored on the held-out one. The reported accuracy is
/// the mean over folds, i.e. the fraction of trials decoded correctly.
pub fn run_loo(spec: &ModelSpec, data: &EpochSet, seed: u64) -> Result<EvalMetrics> {
    let n = data.n_trials();
    if n < 2 {
        return Err(Error::InsufficientData(
            "leave-one-out needs at least 2 trials".into(),
        ));
    }
    let mut folds = Vec::with_capacity(n);
    for held_out in 0..n {
        let train_indices: Vec<usize> = (0..n).filter(|&t| t != held_out).collect();
        let train = data.subset(&train_indices)?;
        let test = data.subset(&[held_out])?;
        // Every fold trains from its own derived seed so folds are
        // independent yet jointly reproducible from the root seed.
        let fold_spec = match spec {
            ModelSpec::Dnn { train: cfg } => ModelSpec::Dnn {
                train: TrainConfig {
                    seed: derive_seed(seed, &format!("eval/fold/{held_out}")),
                    ..*cfg
                },
            },
            other => other.clone(),
        };
        let model = fit(&fold_spec, &train)?;
        let (predicted, _) = predict_set(&model, &test)?;
        folds.push(FoldOutcome::score(
            held_out,
            train.n_trials(),
            predicted,
            test.labels.clone(),
        ));
    }
    Ok(summarize("leave-one-out", folds))
}

/// Sequential transfer evaluation: for each of `n_orders` permutations of
/// the training subjects, one network is trained through all subjects in
/// that order and scored on the held-out test set; the reported accuracy is
/// the mean over orders.
pub fn run_transfer(
    subjects: &[EpochSet],
    test: &EpochSet,
    cfg: &TrainConfig,
    n_orders: usize,
) -> Result<EvalMetrics> {
    let models = train_transfer(subjects, cfg, n_orders)?;
    let n_train: usize = subjects.iter().map(EpochSet::n_trials).sum();
    let folds = models
        .iter()
        .enumerate()
        .map(|(order, model)| {
            let (predicted, _) = mlp::predict(model, test)?;
            Ok(FoldOutcome::score(
                order,
                n_train,
                predicted,
                test.labels.clone(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize("transfer", folds))
}

/// Splits trials into disjoint train/test sets, stratified by class: per
/// class, a seeded shuffle sends `test_fraction` of the trials (rounded,
/// but never all of them) to the test side.
pub fn holdout_split(
    data: &EpochSet,
    test_fraction: f64,
    seed: u64,
) -> Result<(EpochSet, EpochSet)> {
    if !(test_fraction.is_finite() && 0.0 < test_fraction && test_fraction < 1.0) {
        return Err(Error::Argument(format!(
            "test_fraction must lie strictly between 0 and 1, got {test_fraction}"
        )));
    }
    use rand::{Rng, SeedableRng};
    let mut rng =
        rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(seed, "eval/holdout-split"));
    let mut train_indices = Vec::new();
    let mut test_indices = Vec::new();
    for class in [0u8, 1u8] {
        let mut indices: Vec<usize> = (0..data.n_trials())
            .filter(|&t| data.labels[t] == class)
            .collect();
        // Fisher-Yates, spelled out so the stream consumption is frozen.
        for i in (1..indices.len()).rev() {
            let j = rng.random_range(0..=i);
            indices.swap(i, j);
        }
        let n_test = ((indices.len() as f64 * test_fraction).round() as usize)
            .clamp(usize::from(indices.len() > 1), indices.len().saturating_sub(1));
        test_indices.extend_from_slice(&indices[..n_test]);
        train_indices.extend_from_slice(&indices[n_test..]);
    }
    // Keep original trial order within each side.
    train_indices.sort_unstable();
    test_indices.sort_unstable();
    Ok((data.subset(&train_indices)?, data.subset(&test_indices)?))
}

/// Mean prediction accuracy of a label vector against the truth.
pub fn accuracy(predicted: &[u8], actual: &[u8]) -> Result<f64> {
    if predicted.len() != actual.len() || actual.is_empty() {
        return Err(Error::Shape(format!(
            "{} predictions for {} labels",
            predicted.len(),
            actual.len()
        )));
    }
    Ok(predicted
        .iter()
        .zip(actual)
        .filter(|(p, a)| p == a)
        .count() as f64
        / actual.len() as f64)
}

/// Builds a two-class feature table and labels from an epoch set for ad-hoc
/// linear baselines: one row per trial of flattened samples.
pub fn flat_features(data: &EpochSet) -> (Array2<f64>, Vec<u8>) {
    (vectorize_all(data), data.labels.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::extract_epochs;
    use crate::synth::{generate, SynthSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const EPOCH_WINDOW_MS: (f64, f64) = (1000.0, 4000.0);

    fn synth_epochs(
        n_channels: usize,
        n_per_class: usize,
        depth: f64,
        sigma: f64,
        seed: u64,
    ) -> EpochSet {
        let spec = SynthSpec::new(n_channels, n_per_class, depth, sigma, seed)
            .with_discriminative([0], [1]);
        let (rec, _) = generate(&spec).unwrap();
        extract_epochs(&rec, EPOCH_WINDOW_MS, [0, 1]).unwrap()
    }

    fn shuffle_labels(data: &EpochSet, seed: u64) -> EpochSet {
        let mut labels = data.labels.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..labels.len()).rev() {
            let j = rng.random_range(0..=i);
            labels.swap(i, j);
        }
        EpochSet::new(
            data.fs,
            data.channels.clone(),
            data.epochs.clone(),
            data.time_ms.clone(),
            labels,
            data.meta.clone(),
        )
        .unwrap()
    }

    #[test]
    fn holdout_fits_strong_synthetic_contrast_and_reports_one_fold() {
        let data = synth_epochs(4, 30, 0.8, 0.3, 21);
        let (train, test) = holdout_split(&data, 0.25, 7).unwrap();
        assert_eq!(train.n_trials() + test.n_trials(), data.n_trials());
        let (metrics, model) =
            run_holdout(&ModelSpec::CspLda { n_pairs: 1 }, &train, &test).unwrap();
        assert_eq!(metrics.mode, "holdout");
        assert_eq!(metrics.folds.len(), 1);
        assert_eq!(metrics.folds[0].n_train, train.n_trials());
        assert_eq!(metrics.folds[0].n_test, test.n_trials());
        assert!(
            metrics.accuracy >= 0.9,
            "strong contrast should decode well, got {}",
            metrics.accuracy
        );
        assert!(matches!(model, TrainedModel::CspLda { .. }));
    }

    #[test]
    fn holdout_split_is_stratified_and_deterministic() {
        let data = synth_epochs(3, 20, 0.5, 0.5, 22);
        let (train, test) = holdout_split(&data, 0.2, 9).unwrap();
        let count = |set: &EpochSet, class: u8| {
            set.labels.iter().filter(|&&l| l == class).count()
        };
        assert_eq!(count(&test, 0), 4);
        assert_eq!(count(&test, 1), 4);
        assert_eq!(count(&train, 0), 16);
        assert_eq!(count(&train, 1), 16);

        let (train2, test2) = holdout_split(&data, 0.2, 9).unwrap();
        assert_eq!(train.epochs, train2.epochs);
        assert_eq!(test.labels, test2.labels);

        let (_, test3) = holdout_split(&data, 0.2, 10).unwrap();
        assert_ne!(test.epochs, test3.epochs, "different seed, different split");
    }

    #[test]
    fn loo_produces_one_single_trial_fold_per_trial() {
        let data = synth_epochs(3, 36, 0.8, 0.3, 23); // 72 trials total
        let metrics = run_loo(&ModelSpec::CspLda { n_pairs: 1 }, &data, 5).unwrap();
        assert_eq!(metrics.mode, "leave-one-out");
        assert_eq!(metrics.folds.len(), 72);
        for (i, fold) in metrics.folds.iter().enumerate() {
            assert_eq!(fold.fold, i);
            assert_eq!(fold.n_train, 71);
            assert_eq!(fold.n_test, 1);
        }
        // Mean over single-trial folds is the overall fraction correct.
        let correct: usize = metrics.folds.iter().map(|f| f.n_correct).sum();
        assert_eq!(metrics.accuracy, correct as f64 / 72.0);
        assert!(metrics.accuracy >= 0.9, "got {}", metrics.accuracy);
    }

    #[test]
    fn dnn_separates_a_clean_synthetic_set_perfectly() {
        let data = synth_epochs(2, 20, 1.0, 0.05, 24);
        let (train, test) = holdout_split(&data, 0.25, 11).unwrap();
        let cfg = TrainConfig {
            iterations: 300,
            ..TrainConfig::new(31)
        };
        let (metrics, _) = run_holdout(&ModelSpec::Dnn { train: cfg }, &train, &test).unwrap();
        assert_eq!(metrics.accuracy, 1.0);
    }

    #[test]
    fn shuffled_labels_decode_at_chance() {
        let data = synth_epochs(4, 50, 0.8, 0.3, 25); // 100 trials
        let shuffled = shuffle_labels(&data, 77);
        let metrics = run_loo(&ModelSpec::CspLda { n_pairs: 1 }, &shuffled, 6).unwrap();
        assert!(
            (0.35..=0.65).contains(&metrics.accuracy),
            "chance-level decoding expected, got {}",
            metrics.accuracy
        );
    }

    #[test]
    fn fitting_ignores_test_data_entirely() {
        let data = synth_epochs(3, 15, 0.7, 0.4, 26);
        let (train, test) = holdout_split(&data, 0.3, 13).unwrap();
        let spec = ModelSpec::Dnn {
            train: TrainConfig {
                iterations: 50,
                ..TrainConfig::new(41)
            },
        };
        let (_, model_before) = run_holdout(&spec, &train, &test).unwrap();

        // Flip every test label; the fitted parameters must not move.
        let tampered = EpochSet::new(
            test.fs,
            test.channels.clone(),
            test.epochs.clone(),
            test.time_ms.clone(),
            test.labels.iter().map(|&l| 1 - l).collect(),
            test.meta.clone(),
        )
        .unwrap();
        let (_, model_after) = run_holdout(&spec, &train, &tampered).unwrap();
        assert_eq!(model_before, model_after);
    }

    #[test]
    fn transfer_reports_one_fold_per_order() {
        let subjects: Vec<EpochSet> = (0..3)
            .map(|s| synth_epochs(2, 6, 0.9, 0.2, 30 + s))
            .collect();
        let test = synth_epochs(2, 8, 0.9, 0.2, 40);
        let cfg = TrainConfig {
            iterations: 40,
            ..TrainConfig::new(51)
        };
        let metrics = run_transfer(&subjects, &test, &cfg, TRANSFER_ORDERS).unwrap();
        assert_eq!(metrics.mode, "transfer");
        assert_eq!(metrics.folds.len(), 5);
        for fold in &metrics.folds {
            assert_eq!(fold.n_train, 36);
            assert_eq!(fold.n_test, 16);
        }
        let mean: f64 =
            metrics.folds.iter().map(|f| f.accuracy).sum::<f64>() / metrics.folds.len() as f64;
        assert_eq!(metrics.accuracy, mean);
    }

    #[test]
    fn metrics_round_trip_through_json() {
        let data = synth_epochs(2, 4, 0.9, 0.2, 28);
        let metrics = run_loo(&ModelSpec::CspLda { n_pairs: 1 }, &data, 3).unwrap();
        let json = serde_json::to_string_pretty(&metrics).unwrap();
        let back: EvalMetrics = serde_json::from_str(&json).unwrap();
        assert_eq!(metrics, back);
    }

    #[test]
    fn degenerate_protocols_are_rejected() {
        let data = synth_epochs(2, 4, 0.5, 0.3, 29);
        assert!(matches!(
            run_loo(&ModelSpec::CspLda { n_pairs: 1 }, &data.subset(&[0]).unwrap(), 1),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            holdout_split(&data, 0.0, 1),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            holdout_split(&data, 1.0, 1),
            Err(Error::Argument(_))
        ));
    }
}
