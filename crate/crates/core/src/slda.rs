//! Linear discriminant analysis with analytically determined covariance
//! shrinkage, for classifying log-variance features.
//!
//! With few trials and many features the empirical covariance is noisy or
//! singular; it is blended toward the isotropic target `ν·I` (ν = mean
//! eigenvalue) with an intensity γ estimated from the data itself, so no
//! cross-validation is needed.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve_spd;

/// Trained linear discriminant: predicts class 1 when
/// `weights · x + bias > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    /// Discriminant direction `Σ*⁻¹(μ₁ − μ₀)`.
    pub weights: Array1<f64>,
    /// Offset placing the decision boundary midway between the class means.
    pub bias: f64,
    /// Shrinkage intensity γ ∈ [0, 1] used for the pooled covariance.
    pub shrinkage_gamma: f64,
}

impl LdaModel {
    /// Number of features the model expects.
    pub fn n_features(&self) -> usize {
        self.weights.len()
    }
}

/// Shrinkage covariance estimate `Σ* = (1−γ)·S + γ·ν·I` with the analytic
/// optimal intensity.
///
/// `S` is the empirical covariance of the rows of `x` (column means removed,
/// 1/(n−1) normalization) and `ν = trace(S)/p`. The intensity is
///
/// ```text
/// γ* = Σ_ij Var̂(s_ij) / (Σ_{i≠j} s_ij² + Σ_i (s_ii − ν)²)
/// ```
///
/// clipped to [0, 1], where `Var̂(s_ij)` is the sampling-variance estimate of
/// each covariance entry: the empirical variance of the per-sample products
/// `x_ki·x_kj`, scaled by `n/(n−1)²`. The products are deliberately not
/// re-centered — centering makes the estimate degenerate to zero at `n = 2`,
/// where shrinkage is needed the most; callers that want the centered
/// behaviour can center their rows first (classification training does
/// exactly that, per class). A zero denominator (`S` already isotropic)
/// yields γ = 1, which changes nothing since the target equals `S`.
pub fn shrinkage_covariance(x: &Array2<f64>) -> Result<(Array2<f64>, f64)> {
    let (n, p) = x.dim();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "covariance estimation needs at least 2 samples, got {n}"
        )));
    }
    if p == 0 {
        return Err(Error::Shape("feature matrix has zero columns".to_string()));
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::Validation(
            "feature matrix contains non-finite values".to_string(),
        ));
    }

    let mean = x.mean_axis(Axis(0)).expect("n >= 2");
    let centered = x - &mean.broadcast((n, p)).expect("row broadcast");
    let s = centered.t().dot(&centered) / (n - 1) as f64;
    let nu = s.diag().sum() / p as f64;

    // Sampling variance of each s_ij from the spread of per-sample products:
    // Σ_k (w_kij − w̄_ij)² = (Σ_k w_kij²) − n·w̄_ij², with w = x_ki·x_kj.
    let squared = x.mapv(|v| v * v);
    let sum_w2 = squared.t().dot(&squared);
    let w_mean = x.t().dot(x) / n as f64;
    let scale = n as f64 / (n as f64 - 1.0).powi(3);
    let mut numerator = 0.0;
    for ((i, j), &sw2) in sum_w2.indexed_iter() {
        let spread = sw2 - n as f64 * w_mean[[i, j]].powi(2);
        numerator += scale * spread.max(0.0);
    }

    let mut denominator = 0.0;
    for ((i, j), &sij) in s.indexed_iter() {
        if i == j {
            denominator += (sij - nu).powi(2);
        } else {
            denominator += sij * sij;
        }
    }

    let gamma = if denominator == 0.0 {
        1.0
    } else {
        (numerator / denominator).clamp(0.0, 1.0)
    };

    let mut sigma = s.mapv(|v| v * (1.0 - gamma));
    for d in 0..p {
        sigma[[d, d]] += gamma * nu;
    }
    Ok((sigma, gamma))
}

/// Train a shrinkage-regularized linear discriminant on labelled features.
///
/// Rows of `features` are trials; `labels` holds 0 or 1 per trial. The
/// pooled covariance is estimated on class-centered samples (each trial
/// minus its class mean) and shrunk once; the discriminant is
/// `w = Σ*⁻¹(μ₁ − μ₀)` with the boundary midway between the means.
pub fn lda_train(features: &Array2<f64>, labels: &[u8]) -> Result<LdaModel> {
    let (n, p) = features.dim();
    if labels.len() != n {
        return Err(Error::Shape(format!(
            "{} labels for {n} feature rows",
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::Validation(format!(
            "labels must be 0 or 1, found {bad}"
        )));
    }
    let counts = [
        labels.iter().filter(|&&l| l == 0).count(),
        labels.iter().filter(|&&l| l == 1).count(),
    ];
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::InsufficientData(format!(
            "both classes must be present, got {} and {} trials",
            counts[0], counts[1]
        )));
    }

    let mut means = [Array1::<f64>::zeros(p), Array1::<f64>::zeros(p)];
    for (row, &label) in features.axis_iter(Axis(0)).zip(labels) {
        means[label as usize] += &row;
    }
    for (mean, &count) in means.iter_mut().zip(&counts) {
        *mean /= count as f64;
    }

    let mut centered = features.clone();
    for (mut row, &label) in centered.axis_iter_mut(Axis(0)).zip(labels) {
        row -= &means[label as usize];
    }
    let (sigma, gamma) = shrinkage_covariance(&centered)?;
    let nu = sigma.diag().sum() / p as f64;
    if !(nu > 0.0) {
        return Err(Error::Numerical(
            "features carry no within-class variance; covariance is degenerate"
                .to_string(),
        ));
    }

    let delta = &means[1] - &means[0];
    let weights = Array1::from(solve_spd(&sigma, delta.as_slice().expect("contiguous"))?);
    let midpoint = (&means[0] + &means[1]) / 2.0;
    let bias = -weights.dot(&midpoint);
    Ok(LdaModel {
        weights,
        bias,
        shrinkage_gamma: gamma,
    })
}

/// Decision values `weights · x + bias` for each feature row.
pub fn lda_scores(model: &LdaModel, features: &Array2<f64>) -> Result<Vec<f64>> {
    let (_, p) = features.dim();
    if p != model.n_features() {
        return Err(Error::Shape(format!(
            "model expects {} features, got {p}",
            model.n_features()
        )));
    }
    Ok(features
        .axis_iter(Axis(0))
        .map(|row| model.weights.dot(&row) + model.bias)
        .collect())
}

/// Predicted class per feature row: 1 for a strictly positive decision
/// value, 0 otherwise (exact ties go to class 0).
pub fn lda_predict(model: &LdaModel, features: &Array2<f64>) -> Result<Vec<u8>> {
    Ok(lda_scores(model, features)?
        .into_iter()
        .map(|score| u8::from(score > 0.0))
        .collect())
}
