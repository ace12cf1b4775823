//! Two-layer perceptron for single-trial classification: a tanh-activated
//! hidden layer of 500 units followed by a 2-unit softmax readout, trained
//! with plain stochastic gradient descent on cross-entropy loss.
//!
//! Every random choice (weight initialization, batch sampling) flows from an
//! explicit seed through a counter-based generator, so training is bitwise
//! reproducible. Gradients are exposed separately from the update step so
//! they can be validated against finite differences.

use ndarray::{Array1, Array2, Axis};
use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

use crate::data::{vectorize_all, EpochSet};
use crate::erf::{read_f64_payload, read_header_line, write_f64_payload, write_header_line};
use crate::error::{Error, Result};
use crate::seeding::derive_seed;

/// Width of the hidden layer in the reference architecture.
pub const DEFAULT_HIDDEN: usize = 500;

/// Fully-connected 2-layer network: `probs = softmax(W2ᵀ·tanh(W1ᵀx + b1) + b2)`.
///
/// Weight matrices are stored input-major: `w1[[i, j]]` connects input `i`
/// to hidden unit `j`, `w2[[j, k]]` connects hidden unit `j` to output `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    /// First-layer weights, `n_input x n_hidden`.
    pub w1: Array2<f64>,
    /// First-layer biases, `n_hidden`.
    pub b1: Array1<f64>,
    /// Second-layer weights, `n_hidden x 2`.
    pub w2: Array2<f64>,
    /// Second-layer biases, `2`.
    pub b2: Array1<f64>,
    /// Expected input dimensionality (rows of `w1`).
    pub n_input: usize,
    /// Seed the weights were initialized from.
    pub rng_seed: u64,
    /// Total SGD updates applied across all training calls.
    pub iterations_trained: usize,
}

impl MlpModel {
    /// Hidden-layer width.
    pub fn n_hidden(&self) -> usize {
        self.w1.ncols()
    }

    fn check_finite(&self) -> Result<()> {
        let finite = self.w1.iter().all(|v| v.is_finite())
            && self.b1.iter().all(|v| v.is_finite())
            && self.w2.iter().all(|v| v.is_finite())
            && self.b2.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::Numerical(
                "model parameters contain non-finite values".to_string(),
            ));
        }
        Ok(())
    }
}

/// Hyper-parameters for SGD training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Trials sampled (uniformly, with replacement) per update.
    pub batch_size: usize,
    /// Number of SGD updates.
    pub iterations: usize,
    /// Constant step size.
    pub learning_rate: f64,
    /// Seed for the batch-sampling stream.
    pub seed: u64,
}

impl TrainConfig {
    /// The reference schedule: batches of 5, 3000 iterations, step 0.01.
    pub fn new(seed: u64) -> Self {
        Self {
            batch_size: 5,
            iterations: 3000,
            learning_rate: 0.01,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.batch_size < 1 {
            return Err(Error::Validation("batch_size must be at least 1".to_string()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Validation(format!(
                "learning_rate must be positive and finite, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// Initialize a network with the reference hidden width of 500 units.
pub fn init_model(n_input: usize, seed: u64) -> Result<MlpModel> {
    init_model_sized(n_input, DEFAULT_HIDDEN, seed)
}

/// Initialize a network with an explicit hidden width. Weights are drawn
/// uniformly from `[-1/sqrt(fan_in), +1/sqrt(fan_in)]` (first layer, then
/// second, each in row-major order); biases start at zero.
pub fn init_model_sized(n_input: usize, n_hidden: usize, seed: u64) -> Result<MlpModel> {
    if n_input < 1 || n_hidden < 1 {
        return Err(Error::Argument(format!(
            "network needs at least one input and one hidden unit, got {n_input} and {n_hidden}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |rows: usize, cols: usize, fan_in: usize| {
        let bound = 1.0 / (fan_in as f64).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound)
            .expect("uniform bounds are finite and ordered");
        let mut m = Array2::zeros((rows, cols));
        for v in m.iter_mut() {
            *v = dist.sample(&mut rng);
        }
        m
    };
    let w1 = draw(n_input, n_hidden, n_input);
    let w2 = draw(n_hidden, 2, n_hidden);
    Ok(MlpModel {
        w1,
        b1: Array1::zeros(n_hidden),
        w2,
        b2: Array1::zeros(2),
        n_input,
        rng_seed: seed,
        iterations_trained: 0,
    })
}

/// All activations of one forward evaluation.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// Class probabilities, summing to 1.
    pub probs: Array1<f64>,
    /// tanh-activated hidden layer.
    pub hidden: Array1<f64>,
    /// Pre-softmax outputs.
    pub logits: Array1<f64>,
}

/// Evaluate the network on a single input vector.
pub fn forward(model: &MlpModel, x: &Array1<f64>) -> Result<ForwardPass> {
    if x.len() != model.n_input {
        return Err(Error::Shape(format!(
            "input of length {} fed to a network expecting {}",
            x.len(),
            model.n_input
        )));
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::Validation(
            "network input contains non-finite values".to_string(),
        ));
    }
    let hidden = (x.dot(&model.w1) + &model.b1).mapv(f64::tanh);
    let logits = hidden.dot(&model.w2) + &model.b2;
    let probs = softmax(&logits);
    Ok(ForwardPass {
        probs,
        hidden,
        logits,
    })
}

/// Numerically stable softmax (max-subtracted exponentials).
fn softmax(logits: &Array1<f64>) -> Array1<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps = logits.mapv(|l| (l - max).exp());
    let total = exps.sum();
    exps / total
}

/// Log-probabilities via the shifted log-sum-exp, exact even for extreme logits.
fn log_softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_sum = row.iter().map(|l| (l - max).exp()).sum::<f64>().ln() + max;
        row.mapv_inplace(|l| l - log_sum);
    }
    out
}

/// Gradients of the mean cross-entropy over one batch, plus the loss itself.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
    /// Mean cross-entropy of the batch at the evaluated parameters.
    pub loss: f64,
}

/// Forward-and-backward pass over a batch: rows of `batch` are input
/// vectors, `labels` their classes. Returns exact analytic gradients of the
/// mean cross-entropy; [`train`] consumes these unchanged, so validating
/// them validates the training arithmetic.
pub fn batch_gradients(model: &MlpModel, batch: &Array2<f64>, labels: &[u8]) -> Result<Gradients> {
    let (n, d) = batch.dim();
    if d != model.n_input {
        return Err(Error::Shape(format!(
            "batch rows of length {d} fed to a network expecting {}",
            model.n_input
        )));
    }
    if labels.len() != n {
        return Err(Error::Shape(format!(
            "{} labels for a batch of {n} rows",
            labels.len()
        )));
    }
    if n == 0 {
        return Err(Error::InsufficientData("empty batch".to_string()));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::Validation(format!(
            "labels must be 0 or 1, found {bad}"
        )));
    }

    let pre_hidden = batch.dot(&model.w1) + &model.b1;
    let hidden = pre_hidden.mapv(f64::tanh);
    let logits = hidden.dot(&model.w2) + &model.b2;
    let log_probs = log_softmax_rows(&logits);

    let loss = -labels
        .iter()
        .enumerate()
        .map(|(row, &label)| log_probs[[row, label as usize]])
        .sum::<f64>()
        / n as f64;

    // d(mean CE)/d(logits) = (softmax - onehot) / n.
    let mut d_logits = log_probs.mapv(f64::exp);
    for (row, &label) in labels.iter().enumerate() {
        d_logits[[row, label as usize]] -= 1.0;
    }
    d_logits /= n as f64;

    let g_w2 = hidden.t().dot(&d_logits);
    let g_b2 = d_logits.sum_axis(Axis(0));
    let d_hidden = d_logits.dot(&model.w2.t());
    let d_pre = &d_hidden * &hidden.mapv(|h| 1.0 - h * h);
    let g_w1 = batch.t().dot(&d_pre);
    let g_b1 = d_pre.sum_axis(Axis(0));

    Ok(Gradients {
        w1: g_w1,
        b1: g_b1,
        w2: g_w2,
        b2: g_b2,
        loss,
    })
}

fn apply_update(model: &mut MlpModel, grads: &Gradients, learning_rate: f64) {
    model.w1.scaled_add(-learning_rate, &grads.w1);
    model.b1.scaled_add(-learning_rate, &grads.b1);
    model.w2.scaled_add(-learning_rate, &grads.w2);
    model.b2.scaled_add(-learning_rate, &grads.b2);
}

/// Train with plain SGD: each iteration samples `batch_size` trials
/// uniformly with replacement from the seeded stream, computes mean
/// cross-entropy gradients, and takes one step. Returns the updated model
/// with `iterations_trained` advanced; the input model is left untouched.
pub fn train(model: &MlpModel, epochs: &EpochSet, cfg: &TrainConfig) -> Result<MlpModel> {
    cfg.validate()?;
    model.check_finite()?;
    let n_trials = epochs.n_trials();
    if n_trials == 0 {
        return Err(Error::InsufficientData(
            "cannot train on an empty epoch set".to_string(),
        ));
    }
    let data = vectorize_all(epochs);
    if data.ncols() != model.n_input {
        return Err(Error::Shape(format!(
            "vectorized epochs have {} values but the network expects {}",
            data.ncols(),
            model.n_input
        )));
    }

    let mut trained = model.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut batch = Array2::zeros((cfg.batch_size, model.n_input));
    let mut labels = vec![0u8; cfg.batch_size];
    for _ in 0..cfg.iterations {
        for slot in 0..cfg.batch_size {
            let pick = rng.random_range(0..n_trials);
            batch.row_mut(slot).assign(&data.row(pick));
            labels[slot] = epochs.labels[pick];
        }
        let grads = batch_gradients(&trained, &batch, &labels)?;
        apply_update(&mut trained, &grads, cfg.learning_rate);
    }
    trained.iterations_trained += cfg.iterations;
    trained.check_finite()?;
    Ok(trained)
}

/// Sequential cross-subject training: for each of `n_orders` seeded subject
/// permutations, one network (identical initialization across orders) is
/// trained for `cfg.iterations` updates on every subject in permuted
/// sequence. Returns one model per order.
///
/// Stage seeds depend on the position in the sequence, not on subject
/// identity, so permutations of identical subjects yield identical models.
pub fn train_transfer(
    subjects: &[EpochSet],
    cfg: &TrainConfig,
    n_orders: usize,
) -> Result<Vec<MlpModel>> {
    cfg.validate()?;
    if subjects.is_empty() {
        return Err(Error::InsufficientData(
            "transfer training needs at least one source subject".to_string(),
        ));
    }
    if n_orders == 0 {
        return Err(Error::Argument("n_orders must be at least 1".to_string()));
    }
    let n_input = subjects[0].n_timepoints() * subjects[0].n_channels();
    for (i, subject) in subjects.iter().enumerate() {
        let d = subject.n_timepoints() * subject.n_channels();
        if d != n_input {
            return Err(Error::Shape(format!(
                "subject {i} vectorizes to {d} values but subject 0 to {n_input}; \
                 transfer requires a shared input dimensionality"
            )));
        }
    }

    let init_seed = derive_seed(cfg.seed, "transfer/init");
    let init = init_model(n_input, init_seed)?;
    let mut models = Vec::with_capacity(n_orders);
    for order in 0..n_orders {
        let mut permutation: Vec<usize> = (0..subjects.len()).collect();
        let mut order_rng =
            ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &format!("transfer/order/{order}")));
        // Fisher-Yates, spelled out so the stream consumption is frozen.
        for i in (1..permutation.len()).rev() {
            let j = order_rng.random_range(0..=i);
            permutation.swap(i, j);
        }

        let mut model = init.clone();
        for (stage, &subject_index) in permutation.iter().enumerate() {
            let stage_cfg = TrainConfig {
                seed: derive_seed(cfg.seed, &format!("transfer/stage/{stage}")),
                ..cfg.clone()
            };
            model = train(&model, &subjects[subject_index], &stage_cfg)?;
        }
        models.push(model);
    }
    Ok(models)
}

/// Classify every trial: predicted label by largest probability (exact ties
/// go to class 0) plus the class-1 probability as a graded score.
pub fn predict(model: &MlpModel, epochs: &EpochSet) -> Result<(Vec<u8>, Vec<f64>)> {
    let data = vectorize_all(epochs);
    if data.ncols() != model.n_input {
        return Err(Error::Shape(format!(
            "vectorized epochs have {} values but the network expects {}",
            data.ncols(),
            model.n_input
        )));
    }
    let mut labels = Vec::with_capacity(epochs.n_trials());
    let mut scores = Vec::with_capacity(epochs.n_trials());
    for row in data.axis_iter(Axis(0)) {
        let pass = forward(model, &row.to_owned())?;
        labels.push(u8::from(pass.probs[1] > pass.probs[0]));
        scores.push(pass.probs[1]);
    }
    Ok((labels, scores))
}

const MODEL_KIND: &str = "mlp";

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    kind: String,
    n_input: usize,
    n_hidden: usize,
    n_outputs: usize,
    rng_seed: u64,
    iterations_trained: usize,
}

/// Serialize a model: one JSON header line, then all parameters as
/// little-endian 64-bit floats (`w1` row-major, `b1`, `w2` row-major, `b2`).
pub fn write_mlp_model(writer: &mut impl Write, model: &MlpModel) -> Result<()> {
    model.check_finite()?;
    let header = ModelHeader {
        kind: MODEL_KIND.to_string(),
        n_input: model.n_input,
        n_hidden: model.n_hidden(),
        n_outputs: 2,
        rng_seed: model.rng_seed,
        iterations_trained: model.iterations_trained,
    };
    write_header_line(writer, &header)?;
    let values = model
        .w1
        .iter()
        .chain(model.b1.iter())
        .chain(model.w2.iter())
        .chain(model.b2.iter())
        .copied();
    write_f64_payload(writer, values)
}

/// Deserialize a model written by [`write_mlp_model`]; bit-exact round-trip.
pub fn read_mlp_model(reader: &mut impl Read) -> Result<MlpModel> {
    let header: ModelHeader = read_header_line(reader)?;
    if header.kind != MODEL_KIND {
        return Err(Error::Format(format!(
            "expected a '{MODEL_KIND}' model file, found kind '{}'",
            header.kind
        )));
    }
    if header.n_outputs != 2 {
        return Err(Error::Format(format!(
            "only 2-class models are supported, file declares {}",
            header.n_outputs
        )));
    }
    let (ni, nh) = (header.n_input, header.n_hidden);
    if ni == 0 || nh == 0 {
        return Err(Error::Format(
            "model header declares an empty layer".to_string(),
        ));
    }
    let n_values = ni * nh + nh + nh * 2 + 2;
    let values = read_f64_payload(reader, n_values)?;
    let mut it = values.into_iter();
    let mut take = |count: usize| -> Vec<f64> { it.by_ref().take(count).collect() };
    let w1 = Array2::from_shape_vec((ni, nh), take(ni * nh)).expect("sized above");
    let b1 = Array1::from_vec(take(nh));
    let w2 = Array2::from_shape_vec((nh, 2), take(nh * 2)).expect("sized above");
    let b2 = Array1::from_vec(take(2));
    let model = MlpModel {
        w1,
        b1,
        w2,
        b2,
        n_input: ni,
        rng_seed: header.rng_seed,
        iterations_trained: header.iterations_trained,
    };
    model.check_finite()?;
    Ok(model)
}

/// Convenience wrapper writing through a buffered file.
pub fn save_mlp_model(path: &Path, model: &MlpModel) -> Result<()> {
    let mut writer = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_mlp_model(&mut writer, model)
}

/// Convenience wrapper reading from a file path.
pub fn load_mlp_model(path: &Path) -> Result<MlpModel> {
    let mut reader = std::io::BufReader::new(std::fs::File::open(path)?);
    read_mlp_model(&mut reader)
}
