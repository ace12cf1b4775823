//! Layer-wise relevance propagation: decomposes one classifier decision into
//! signed per-input relevance scores.
//!
//! Starting from the pre-softmax output of the target class, relevance flows
//! backward through each weighted-sum connection in proportion to that
//! connection's share of the receiving unit's pre-activation:
//!
//! ```text
//! r_i = Σ_j  (x_i·w_ij) / (Σ_i' x_i'·w_i'j + b_j ± ε)  ·  r_j
//! ```
//!
//! tanh activations pass relevance through unchanged. Summing relevance over
//! any layer reproduces the target logit, minus whatever the bias terms (and
//! the ε stabilizer) absorbed along the way — the conservation property that
//! [`conservation_report`] quantifies.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::data::{epoch_from_vector, vectorize_epoch, EpochSet, RelevanceMap};
use crate::error::{Error, Result};
use crate::mlp::{forward, MlpModel};

/// Which class's output to decompose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelevanceTarget {
    /// The class the network actually decided for (ties resolve to class 0).
    #[default]
    PredictedClass,
    /// Always decompose the class-0 output.
    Class0,
    /// Always decompose the class-1 output.
    Class1,
}

/// Where the backward decomposition begins. Only the pre-softmax outputs are
/// supported: the softmax is a monotone normalization, so the logit carries
/// the decision's sign structure undistorted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartLayer {
    #[default]
    Logits,
}

/// Options for the propagation rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LrpConfig {
    /// Denominator stabilizer, added with the denominator's sign. Zero keeps
    /// the rule exact but fails on inputs whose pre-activations vanish.
    pub epsilon: f64,
    /// Which output to explain.
    pub target: RelevanceTarget,
    /// Starting point of the decomposition.
    pub start_layer: StartLayer,
}

impl Default for LrpConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-9,
            target: RelevanceTarget::default(),
            start_layer: StartLayer::default(),
        }
    }
}

impl LrpConfig {
    fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::Validation(format!(
                "epsilon must be finite and non-negative, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

fn stabilized(denominator: f64, epsilon: f64) -> Result<f64> {
    // sign(0) is taken as +1 so a positive ε always moves away from zero.
    let sign = if denominator < 0.0 { -1.0 } else { 1.0 };
    let d = denominator + epsilon * sign;
    if d == 0.0 {
        return Err(Error::Numerical(
            "relevance denominator is exactly zero; rerun with epsilon > 0 to \
             stabilize the decomposition"
                .to_string(),
        ));
    }
    Ok(d)
}

/// Redistribute relevance backward through one weighted-sum layer.
///
/// `input` holds the layer's input activations, `relevance_out` the
/// relevance sitting on its outputs. Returns the relevance arriving at each
/// input plus the amount absorbed by the bias and stabilizer terms, so that
/// `Σ input relevance + absorbed == Σ output relevance` exactly.
pub fn relevance_through_dense(
    input: &Array1<f64>,
    weights: &Array2<f64>,
    bias: &Array1<f64>,
    relevance_out: &Array1<f64>,
    epsilon: f64,
) -> Result<(Array1<f64>, f64)> {
    let (n_in, n_out) = weights.dim();
    if input.len() != n_in || bias.len() != n_out || relevance_out.len() != n_out {
        return Err(Error::Shape(format!(
            "dense relevance step: input {} / weights {n_in}x{n_out} / bias {} / \
             output relevance {}",
            input.len(),
            bias.len(),
            relevance_out.len()
        )));
    }
    let pre_activation = input.dot(weights) + bias;
    let mut factors = Array1::zeros(n_out);
    let mut absorbed = 0.0;
    for j in 0..n_out {
        let d = stabilized(pre_activation[j], epsilon)?;
        let factor = relevance_out[j] / d;
        factors[j] = factor;
        // d − Σ_i z_ij = b_j + ε·sign: the share not backed by any input.
        absorbed += (d - (pre_activation[j] - bias[j])) * factor;
    }
    let relevance_in = input * &weights.dot(&factors);
    Ok((relevance_in, absorbed))
}

fn target_class(cfg: &LrpConfig, probs: &Array1<f64>) -> u8 {
    match cfg.target {
        RelevanceTarget::PredictedClass => u8::from(probs[1] > probs[0]),
        RelevanceTarget::Class0 => 0,
        RelevanceTarget::Class1 => 1,
    }
}

struct Decomposition {
    relevance_logits: Array1<f64>,
    relevance_hidden: Array1<f64>,
    relevance_input: Array1<f64>,
    absorbed_output_layer: f64,
    absorbed_hidden_layer: f64,
    target: u8,
    logit: f64,
    class1_probability: f64,
}

fn decompose(model: &MlpModel, x: &Array1<f64>, cfg: &LrpConfig) -> Result<Decomposition> {
    cfg.validate()?;
    let StartLayer::Logits = cfg.start_layer;
    let pass = forward(model, x)?;
    let target = target_class(cfg, &pass.probs);
    let logit = pass.logits[target as usize];

    let mut relevance_logits = Array1::zeros(pass.logits.len());
    relevance_logits[target as usize] = logit;

    let (relevance_hidden, absorbed_output_layer) = relevance_through_dense(
        &pass.hidden,
        &model.w2,
        &model.b2,
        &relevance_logits,
        cfg.epsilon,
    )?;
    // tanh is relevance-transparent: what sits on the activation sits on the
    // unit, so the hidden relevance feeds the first layer unchanged.
    let (relevance_input, absorbed_hidden_layer) =
        relevance_through_dense(x, &model.w1, &model.b1, &relevance_hidden, cfg.epsilon)?;

    if !relevance_input.iter().all(|v| v.is_finite()) {
        return Err(Error::Numerical(
            "relevance overflowed to non-finite values; rerun with epsilon > 0"
                .to_string(),
        ));
    }
    Ok(Decomposition {
        relevance_logits,
        relevance_hidden,
        relevance_input,
        absorbed_output_layer,
        absorbed_hidden_layer,
        target,
        logit,
        class1_probability: pass.probs[1],
    })
}

/// Relevance of every input element for one decision, as a flat vector in
/// the classifier's input layout.
pub fn input_relevance(model: &MlpModel, x: &Array1<f64>, cfg: &LrpConfig) -> Result<Array1<f64>> {
    Ok(decompose(model, x, cfg)?.relevance_input)
}

/// Decompose the decision on one trial of an epoch set into a time × channel
/// relevance map, annotated with the decision itself.
pub fn relevance_propagate(
    model: &MlpModel,
    epochs: &EpochSet,
    trial: usize,
    cfg: &LrpConfig,
) -> Result<RelevanceMap> {
    let x = vectorize_epoch(epochs, trial)?;
    let d = decompose(model, &x, cfg)?;
    let values = epoch_from_vector(&d.relevance_input, epochs.n_timepoints(), epochs.n_channels())?;
    let decoded = u8::from(d.class1_probability > 0.5);
    Ok(
        RelevanceMap::new(epochs.channels.clone(), epochs.time_ms.clone(), values)?.annotate(
            trial,
            decoded,
            d.class1_probability,
            d.target,
        ),
    )
}

/// Book-keeping of the conservation property for one decision.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConservationReport {
    /// Relevance totals per layer, from the start of the decomposition
    /// inward: logits, hidden, input.
    pub layer_sums: Vec<f64>,
    /// Relevance absorbed by bias and stabilizer terms at each propagation
    /// step, aligned with the transitions between `layer_sums` entries.
    pub bias_shares: Vec<f64>,
    /// Total relevance arriving at the input.
    pub input_sum: f64,
    /// The decomposed quantity: the target class's pre-softmax output.
    pub f_x: f64,
    /// `f_x − input_sum`: what never reached the inputs.
    pub bias_leak: f64,
    /// Class whose output was decomposed.
    pub target_class: u8,
}

/// Trace how much relevance each layer retains and how much the biases
/// absorb. With all biases zero and ε = 0 the leak vanishes and Σ r at the
/// input equals the target logit exactly (up to rounding).
pub fn conservation_report(
    model: &MlpModel,
    x: &Array1<f64>,
    cfg: &LrpConfig,
) -> Result<ConservationReport> {
    let d = decompose(model, x, cfg)?;
    let input_sum = d.relevance_input.sum();
    Ok(ConservationReport {
        layer_sums: vec![
            d.relevance_logits.sum(),
            d.relevance_hidden.sum(),
            input_sum,
        ],
        bias_shares: vec![d.absorbed_output_layer, d.absorbed_hidden_layer],
        input_sum,
        f_x: d.logit,
        bias_leak: d.logit - input_sum,
        target_class: d.target,
    })
}

/// Per-channel mean relevance over the epoch window.
pub fn time_average(map: &RelevanceMap) -> Array1<f64> {
    let n_time = map.values.nrows().max(1) as f64;
    map.values.sum_axis(ndarray::Axis(0)) / n_time
}

/// Element-wise mean of the maps' per-channel time averages — the summary
/// used for class-level scalp topographies.
pub fn class_average(maps: &[RelevanceMap]) -> Result<Array1<f64>> {
    let first = maps.first().ok_or_else(|| {
        Error::Argument("cannot average an empty list of relevance maps".to_string())
    })?;
    let mut total = Array1::zeros(first.channels.len());
    for map in maps {
        if map.channels != first.channels {
            return Err(Error::Shape(
                "relevance maps cover different channel sets".to_string(),
            ));
        }
        total += &time_average(map);
    }
    Ok(total / maps.len() as f64)
}

/// Element-wise mean of full time × channel maps (for averaged heatmaps).
pub fn mean_map(maps: &[RelevanceMap]) -> Result<Array2<f64>> {
    let first = maps.first().ok_or_else(|| {
        Error::Argument("cannot average an empty list of relevance maps".to_string())
    })?;
    let mut total = Array2::zeros(first.values.dim());
    for map in maps {
        if map.values.dim() != first.values.dim() || map.channels != first.channels {
            return Err(Error::Shape(
                "relevance maps have mismatched shapes".to_string(),
            ));
        }
        total += &map.values;
    }
    Ok(total / maps.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::init_model_sized;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn zero_bias_model(n_input: usize, n_hidden: usize, seed: u64) -> MlpModel {
        init_model_sized(n_input, n_hidden, seed).unwrap()
        // biases are already zero after initialization
    }

    fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Array1<f64> {
        Array1::from_iter((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
    }

    #[test]
    fn equal_contributions_split_the_output_evenly() {
        let x = array![1.0, 1.0];
        let w = array![[2.0], [2.0]];
        let bias = array![0.0];
        let f_x = 4.0;
        let (r, absorbed) =
            relevance_through_dense(&x, &w, &bias, &array![f_x], 0.0).unwrap();
        assert_abs_diff_eq!(r[0], 2.0, epsilon = 0.0);
        assert_abs_diff_eq!(r[1], 2.0, epsilon = 0.0);
        assert_abs_diff_eq!(absorbed, 0.0, epsilon = 0.0);
    }

    #[test]
    fn single_unbiased_layer_conserves_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(70);
        for _ in 0..20 {
            let x = random_vector(&mut rng, 7);
            let mut w = Array2::zeros((7, 1));
            for v in w.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            let f_x = x.dot(&w.column(0));
            let (r, absorbed) =
                relevance_through_dense(&x, &w, &array![0.0], &array![f_x], 0.0).unwrap();
            assert_abs_diff_eq!(r.sum(), f_x, epsilon = 1e-12 * f_x.abs().max(1.0));
            assert_abs_diff_eq!(absorbed, 0.0, epsilon = 0.0);
        }
    }

    /// Direct, index-by-index restatement of the redistribution rule, with
    /// no code shared with the implementation under test.
    fn brute_force_relevance(
        model: &MlpModel,
        x: &Array1<f64>,
        epsilon: f64,
        target: usize,
    ) -> Vec<f64> {
        let n_in = model.n_input;
        let n_hidden = model.n_hidden();

        // Forward, scalar style.
        let mut hidden = vec![0.0; n_hidden];
        let mut pre_hidden = vec![0.0; n_hidden];
        for j in 0..n_hidden {
            let mut z = model.b1[j];
            for i in 0..n_in {
                z += x[i] * model.w1[[i, j]];
            }
            pre_hidden[j] = z;
            hidden[j] = z.tanh();
        }
        let mut logits = vec![0.0; 2];
        for k in 0..2 {
            let mut z = model.b2[k];
            for j in 0..n_hidden {
                z += hidden[j] * model.w2[[j, k]];
            }
            logits[k] = z;
        }

        let eps_signed = |d: f64| if d < 0.0 { d - epsilon } else { d + epsilon };

        // Relevance at logits.
        let mut r_logits = vec![0.0; 2];
        r_logits[target] = logits[target];

        // Through the second layer.
        let mut r_hidden = vec![0.0; n_hidden];
        for j in 0..n_hidden {
            let mut acc = 0.0;
            for k in 0..2 {
                let mut denom = model.b2[k];
                for j2 in 0..n_hidden {
                    denom += hidden[j2] * model.w2[[j2, k]];
                }
                acc += hidden[j] * model.w2[[j, k]] / eps_signed(denom) * r_logits[k];
            }
            r_hidden[j] = acc;
        }

        // Through the first layer (tanh transparent).
        let mut r_input = vec![0.0; n_in];
        for i in 0..n_in {
            let mut acc = 0.0;
            for j in 0..n_hidden {
                let mut denom = model.b1[j];
                for i2 in 0..n_in {
                    denom += x[i2] * model.w1[[i2, j]];
                }
                acc += x[i] * model.w1[[i, j]] / eps_signed(denom) * r_hidden[j];
            }
            r_input[i] = acc;
        }
        r_input
    }

    #[test]
    fn layerwise_implementation_matches_brute_force_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for seed in 0..10u64 {
            let model = zero_bias_model(6, 4, 700 + seed);
            let x = random_vector(&mut rng, 6);
            let cfg = LrpConfig {
                epsilon: 0.0,
                target: RelevanceTarget::Class0,
                ..LrpConfig::default()
            };
            let fast = input_relevance(&model, &x, &cfg).unwrap();
            let slow = brute_force_relevance(&model, &x, 0.0, 0);
            for (a, b) in fast.iter().zip(&slow) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn brute_force_agreement_holds_with_biases_and_epsilon() {
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        let mut model = init_model_sized(5, 3, 73).unwrap();
        for v in model.b1.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        for v in model.b2.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let x = random_vector(&mut rng, 5);
        let cfg = LrpConfig {
            epsilon: 1e-9,
            target: RelevanceTarget::Class1,
            ..LrpConfig::default()
        };
        let fast = input_relevance(&model, &x, &cfg).unwrap();
        let slow = brute_force_relevance(&model, &x, 1e-9, 1);
        for (a, b) in fast.iter().zip(&slow) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_bias_networks_conserve_the_target_logit() {
        let mut rng = ChaCha8Rng::seed_from_u64(74);
        for seed in 0..25u64 {
            let n_input = 3 + (seed as usize % 8);
            let model = zero_bias_model(n_input, 5, 7400 + seed);
            let x = random_vector(&mut rng, n_input);
            let cfg = LrpConfig {
                epsilon: 0.0,
                ..LrpConfig::default()
            };
            let r = input_relevance(&model, &x, &cfg).unwrap();
            let logit = {
                let pass = forward(&model, &x).unwrap();
                let t = target_class(&cfg, &pass.probs);
                pass.logits[t as usize]
            };
            assert!(
                (r.sum() - logit).abs() <= 1e-9 * logit.abs() + 1e-12,
                "conservation violated: Σr = {}, logit = {logit}",
                r.sum()
            );
        }
    }

    #[test]
    fn conservation_report_balances_every_layer() {
        let mut rng = ChaCha8Rng::seed_from_u64(75);
        let mut model = init_model_sized(8, 6, 76).unwrap();
        for v in model.b1.iter_mut() {
            *v = 0.3 * rng.sample::<f64, _>(StandardNormal);
        }
        for v in model.b2.iter_mut() {
            *v = 0.3 * rng.sample::<f64, _>(StandardNormal);
        }
        let x = random_vector(&mut rng, 8);
        let report = conservation_report(&model, &x, &LrpConfig::default()).unwrap();

        assert_eq!(report.layer_sums.len(), 3);
        assert_eq!(report.bias_shares.len(), 2);
        assert_abs_diff_eq!(report.layer_sums[0], report.f_x, epsilon = 1e-12);
        // Each transition loses exactly the bias share of that step.
        assert_abs_diff_eq!(
            report.layer_sums[1],
            report.layer_sums[0] - report.bias_shares[0],
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            report.layer_sums[2],
            report.layer_sums[1] - report.bias_shares[1],
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            report.bias_leak,
            report.bias_shares.iter().sum::<f64>(),
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(report.input_sum, report.layer_sums[2], epsilon = 0.0);
    }

    #[test]
    fn zero_bias_report_shows_no_leak() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let model = zero_bias_model(10, 4, 78);
        let x = random_vector(&mut rng, 10);
        let cfg = LrpConfig {
            epsilon: 0.0,
            ..LrpConfig::default()
        };
        let report = conservation_report(&model, &x, &cfg).unwrap();
        assert!(
            report.bias_leak.abs() < 1e-9 * report.f_x.abs() + 1e-12,
            "leak {} for f_x {}",
            report.bias_leak,
            report.f_x
        );
    }

    #[test]
    fn small_epsilon_barely_perturbs_well_conditioned_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        let model = zero_bias_model(9, 5, 80);
        let x = random_vector(&mut rng, 9);
        let exact = conservation_report(
            &model,
            &x,
            &LrpConfig {
                epsilon: 0.0,
                ..LrpConfig::default()
            },
        )
        .unwrap();
        let stabilized = conservation_report(&model, &x, &LrpConfig::default()).unwrap();
        let rel = (exact.input_sum - stabilized.input_sum).abs()
            / exact.input_sum.abs().max(1e-12);
        assert!(rel < 1e-6, "stabilizer shifted the input sum by {rel:.2e}");
    }

    #[test]
    fn scaling_the_output_layer_preserves_relevance_fractions() {
        // Positive homogeneity applies to the layer feeding the start point:
        // scaling W2 by c scales logits and every relevance linearly. (The
        // first layer sits behind a tanh, so scaling W1 changes the hidden
        // activations nonlinearly and the fractions legitimately move.)
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        let model = zero_bias_model(7, 4, 82);
        let mut scaled = model.clone();
        scaled.w2.mapv_inplace(|v| 3.0 * v);
        let x = random_vector(&mut rng, 7);
        let cfg = LrpConfig {
            epsilon: 0.0,
            target: RelevanceTarget::Class1,
            ..LrpConfig::default()
        };
        let r = input_relevance(&model, &x, &cfg).unwrap();
        let r_scaled = input_relevance(&scaled, &x, &cfg).unwrap();
        let (sum, sum_scaled) = (r.sum(), r_scaled.sum());
        for (a, b) in r.iter().zip(r_scaled.iter()) {
            assert_abs_diff_eq!(a / sum, b / sum_scaled, epsilon = 1e-9);
        }
        // And the decomposed quantity itself scaled by 3.
        assert_abs_diff_eq!(sum_scaled, 3.0 * sum, epsilon = 1e-9 * sum.abs());
    }

    #[test]
    fn zero_denominators_demand_a_positive_epsilon() {
        let mut model = init_model_sized(3, 2, 83).unwrap();
        model.w2.fill(0.0); // logits identically zero
        let x = array![1.0, 2.0, 3.0];
        let cfg = LrpConfig {
            epsilon: 0.0,
            ..LrpConfig::default()
        };
        match input_relevance(&model, &x, &cfg) {
            Err(Error::Numerical(message)) => {
                assert!(message.contains("epsilon"), "{message}");
            }
            other => panic!("expected Numerical error, got {other:?}"),
        }
        // The same input passes with the default stabilizer.
        assert!(input_relevance(&model, &x, &LrpConfig::default()).is_ok());
    }

    #[test]
    fn dimension_mismatch_is_a_shape_error() {
        let model = init_model_sized(4, 2, 84).unwrap();
        let x = array![1.0, 2.0];
        assert!(matches!(
            input_relevance(&model, &x, &LrpConfig::default()),
            Err(Error::Shape(_))
        ));
    }

    fn map_epochs() -> EpochSet {
        let mut data = Array3::zeros((2, 3, 2));
        for (i, v) in data.iter_mut().enumerate() {
            *v = i as f64 * 0.1 - 0.25;
        }
        EpochSet::new(
            100.0,
            vec!["C3".to_string(), "C4".to_string()],
            data,
            vec![0.0, 10.0, 20.0],
            vec![0, 1],
            serde_json::json!({}),
        )
        .unwrap()
    }

    #[test]
    fn trial_decomposition_reshapes_time_major_and_annotates() {
        let eps = map_epochs();
        let model = init_model_sized(6, 4, 85).unwrap();
        let cfg = LrpConfig::default();
        let map = relevance_propagate(&model, &eps, 1, &cfg).unwrap();
        assert_eq!(map.values.dim(), (3, 2));
        assert_eq!(map.trial_index, 1);
        assert_eq!(map.channels, eps.channels);
        assert_eq!(map.time_ms, eps.time_ms);
        assert_eq!(map.target_class, map.decoded_class);

        // The flat relevance vector folds back row by row.
        let x = vectorize_epoch(&eps, 1).unwrap();
        let flat = input_relevance(&model, &x, &cfg).unwrap();
        for t in 0..3 {
            for c in 0..2 {
                assert_eq!(map.values[[t, c]], flat[t * 2 + c]);
            }
        }
        // Decoded class is consistent with the reported probability.
        assert_eq!(map.decoded_class, u8::from(map.classifier_score > 0.5));
    }

    #[test]
    fn fixed_target_overrides_the_decision() {
        let eps = map_epochs();
        let model = init_model_sized(6, 4, 86).unwrap();
        let cfg = LrpConfig {
            target: RelevanceTarget::Class1,
            ..LrpConfig::default()
        };
        let map = relevance_propagate(&model, &eps, 0, &cfg).unwrap();
        assert_eq!(map.target_class, 1);
    }

    #[test]
    fn time_average_of_constant_map_is_that_constant() {
        let values = Array2::from_elem((5, 3), 0.7);
        let map = RelevanceMap::new(
            vec!["a".into(), "b".into(), "c".into()],
            (0..5).map(|i| i as f64).collect(),
            values,
        )
        .unwrap();
        let avg = time_average(&map);
        for &v in avg.iter() {
            assert_abs_diff_eq!(v, 0.7, epsilon = 1e-15);
        }
    }

    #[test]
    fn class_average_cancels_opposite_maps_and_keeps_identical_ones() {
        let values = Array2::from_shape_fn((4, 2), |(t, c)| (t + 2 * c) as f64 - 2.0);
        let channels = vec!["a".to_string(), "b".to_string()];
        let time: Vec<f64> = (0..4).map(|i| i as f64).collect();
        let m = RelevanceMap::new(channels.clone(), time.clone(), values.clone()).unwrap();
        let neg =
            RelevanceMap::new(channels.clone(), time.clone(), values.mapv(|v| -v)).unwrap();

        let cancelled = class_average(&[m.clone(), neg]).unwrap();
        for &v in cancelled.iter() {
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-15);
        }

        let repeated = class_average(&[m.clone(), m.clone(), m.clone()]).unwrap();
        let single = time_average(&m);
        for (a, b) in repeated.iter().zip(single.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }

        let full = mean_map(&[m.clone(), m.clone()]).unwrap();
        assert_eq!(full, m.values);
    }

    #[test]
    fn averaging_nothing_is_an_argument_error() {
        assert!(matches!(class_average(&[]), Err(Error::Argument(_))));
        assert!(matches!(mean_map(&[]), Err(Error::Argument(_))));
    }
}
