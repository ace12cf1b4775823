//! Common Spatial Patterns: class covariance estimation, the generalized
//! eigendecomposition Σ₀w = λ(Σ₀+Σ₁)w, filter-pair selection, and
//! log-variance feature extraction.
//!
//! Spatial *filters* (columns of `W`) project multichannel epochs onto
//! directions whose band-power discriminates the two classes; the dual
//! *patterns* (columns of `A`) describe how each extracted source projects
//! back onto the channels and are what scalp topographies should display.

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::data::EpochSet;
use crate::error::{Error, Result};
use crate::linalg::{invert_spd, sym_eigen_desc};

/// Variance floor for log-variance features; quieter projections are clamped
/// to `ln(VARIANCE_FLOOR)` and reported through the warning log.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Relative ridge added to the composite covariance before decomposition.
const RIDGE_SCALE: f64 = 1e-10;

/// Condition-number limit beyond which the composite covariance is treated
/// as numerically singular. The ridge floors the smallest eigenvalue at
/// `RIDGE_SCALE · trace / n`, so a genuinely rank-deficient composite shows a
/// condition number of at least ~1e10; healthy covariances sit far below.
const CONDITION_LIMIT: f64 = 1e9;

/// A set of selected CSP filters with their dual patterns and eigenvalues.
///
/// Columns are ordered by alternating spectral extremes: largest eigenvalue,
/// smallest, second-largest, second-smallest, and so on. Each filter is
/// scaled so the largest-magnitude coefficient of its pattern is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialFilterBank {
    /// Spatial filters `W`, one column per selected component
    /// (`n_channels x n_selected`).
    pub filters: Array2<f64>,
    /// Activation patterns `A = (Σ₀+Σ₁) W (Wᵀ(Σ₀+Σ₁)W)⁻¹`, same shape.
    pub patterns: Array2<f64>,
    /// Generalized eigenvalue of each selected component, in (0, 1); values
    /// near 1 mark components whose variance is dominated by class 0, values
    /// near 0 by class 1.
    pub eigenvalues: Vec<f64>,
}

impl SpatialFilterBank {
    /// Number of channels the filters expect.
    pub fn n_channels(&self) -> usize {
        self.filters.nrows()
    }

    /// Number of selected components (2 per pair).
    pub fn n_selected(&self) -> usize {
        self.filters.ncols()
    }
}

/// Average trace-normalized per-trial covariances within each class.
///
/// Each trial's channel covariance is `XᵀX / trace(XᵀX)` (no mean removal —
/// band-passed signals are zero-mean by construction, and trace
/// normalization equalizes per-trial power). Returns `(Σ₀, Σ₁)`, each
/// symmetric positive semidefinite with unit trace.
pub fn class_covariances(epochs: &EpochSet) -> Result<(Array2<f64>, Array2<f64>)> {
    let (n_trials, _, n_channels) = epochs.epochs.dim();
    let counts = [
        epochs.labels.iter().filter(|&&l| l == 0).count(),
        epochs.labels.iter().filter(|&&l| l == 1).count(),
    ];
    for (class, &count) in counts.iter().enumerate() {
        if count < 2 {
            return Err(Error::InsufficientData(format!(
                "class {class} has {count} trial(s); covariance averaging needs at least 2"
            )));
        }
    }
    let mut sums = [
        Array2::<f64>::zeros((n_channels, n_channels)),
        Array2::<f64>::zeros((n_channels, n_channels)),
    ];
    for trial in 0..n_trials {
        let x = epochs.epochs.index_axis(Axis(0), trial);
        let mut cov = x.t().dot(&x);
        let trace: f64 = cov.diag().sum();
        if !(trace.is_finite() && trace > 0.0) {
            return Err(Error::Numerical(format!(
                "trial {trial} has zero or non-finite total power; cannot trace-normalize \
                 its covariance"
            )));
        }
        cov /= trace;
        sums[epochs.labels[trial] as usize] += &cov;
    }
    let mut result = sums
        .into_iter()
        .zip(counts)
        .map(|(sum, count)| sum / count as f64);
    Ok((
        symmetrize(result.next().expect("two sums were built")),
        symmetrize(result.next().expect("two sums were built")),
    ))
}

fn symmetrize(a: Array2<f64>) -> Array2<f64> {
    let t = a.t().to_owned();
    (a + t) / 2.0
}

/// Solve the generalized eigenproblem `Σ₀ w = λ (Σ₀+Σ₁) w` and select
/// `n_pairs` filters from each spectral extreme.
///
/// The composite `Σ₀+Σ₁` receives a small relative ridge before
/// decomposition. Selected columns alternate between the extremes (largest,
/// smallest, second-largest, ...), so a bank made with `n_pairs =
/// n_channels/2` holds the complete decomposition.
pub fn csp_decompose(
    sigma0: &Array2<f64>,
    sigma1: &Array2<f64>,
    n_pairs: usize,
) -> Result<SpatialFilterBank> {
    let n = sigma0.nrows();
    if sigma0.dim() != (n, n) || sigma1.dim() != (n, n) {
        return Err(Error::Shape(format!(
            "class covariances must be square and equal-sized, got {:?} and {:?}",
            sigma0.dim(),
            sigma1.dim()
        )));
    }
    for (name, m) in [("first", sigma0), ("second", sigma1)] {
        let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
        let asym = m
            .indexed_iter()
            .fold(0.0f64, |acc, ((r, c), &v)| acc.max((v - m[[c, r]]).abs()));
        if !m.iter().all(|v| v.is_finite()) || asym > 1e-8 * scale {
            return Err(Error::Validation(format!(
                "{name} class covariance is not a finite symmetric matrix"
            )));
        }
    }
    if n_pairs == 0 || 2 * n_pairs > n {
        return Err(Error::Argument(format!(
            "cannot select {n_pairs} filter pair(s) from {n} channel(s); need \
             1 <= 2*n_pairs <= n_channels"
        )));
    }

    let mut composite = sigma0 + sigma1;
    let trace: f64 = composite.diag().sum();
    let ridge = RIDGE_SCALE * trace / n as f64;
    for d in 0..n {
        composite[[d, d]] += ridge;
    }

    // Whitening: composite = Q Λ Qᵀ, P = Λ^{-1/2} Qᵀ, so P composite Pᵀ = I.
    let (comp_values, comp_vectors) = sym_eigen_desc(&composite)?;
    let lambda_max = comp_values[0];
    let lambda_min = *comp_values.last().expect("n >= 2 checked above");
    if !(lambda_min > 0.0) || lambda_max / lambda_min > CONDITION_LIMIT {
        let condition = if lambda_min > 0.0 {
            format!("{:.2e}", lambda_max / lambda_min)
        } else {
            "infinite".to_string()
        };
        return Err(Error::Numerical(format!(
            "composite covariance is numerically singular even after ridge \
             regularization (condition estimate {condition})"
        )));
    }
    let mut whiten = comp_vectors.t().to_owned();
    for (row, &value) in whiten.axis_iter_mut(Axis(0)).zip(&comp_values) {
        let scale = 1.0 / value.sqrt();
        let mut row = row;
        row.mapv_inplace(|v| v * scale);
    }

    // In whitened space the problem becomes an ordinary symmetric
    // eigendecomposition of P Σ₀ Pᵀ; eigenvalues are the generalized λ.
    let whitened = symmetrize(whiten.dot(sigma0).dot(&whiten.t()));
    let (values, vectors) = sym_eigen_desc(&whitened)?;
    let full_filters = whiten.t().dot(&vectors);

    // Alternate the spectral extremes: indices into the descending spectrum.
    let selected: Vec<usize> = (0..n_pairs)
        .flat_map(|k| [k, n - 1 - k])
        .collect();
    let mut filters = Array2::zeros((n, 2 * n_pairs));
    let mut eigenvalues = Vec::with_capacity(2 * n_pairs);
    for (out_col, &src_col) in selected.iter().enumerate() {
        filters
            .column_mut(out_col)
            .assign(&full_filters.column(src_col));
        eigenvalues.push(values[src_col]);
    }

    // Patterns: A = composite · W · (Wᵀ · composite · W)⁻¹.
    let cw = composite.dot(&filters);
    let gram = symmetrize(filters.t().dot(&cw));
    let patterns = cw.dot(&invert_spd(&gram)?);

    // Deterministic sign: largest-magnitude pattern coefficient positive.
    let mut filters = filters;
    let mut patterns = patterns;
    for col in 0..2 * n_pairs {
        let pattern = patterns.column(col);
        let lead = pattern
            .iter()
            .enumerate()
            .max_by(|a, b| {
                a.1.abs()
                    .partial_cmp(&b.1.abs())
                    .expect("pattern coefficients are finite")
            })
            .map(|(i, _)| i)
            .expect("patterns have at least one row");
        if patterns[[lead, col]] < 0.0 {
            filters.column_mut(col).mapv_inplace(|v| -v);
            patterns.column_mut(col).mapv_inplace(|v| -v);
        }
    }

    Ok(SpatialFilterBank {
        filters,
        patterns,
        eigenvalues,
    })
}

/// Log-variance of each trial projected through each filter:
/// `feature[t, j] = ln(var(X_t · w_j))` with 1/(n−1) variance normalization.
///
/// Projections quieter than [`VARIANCE_FLOOR`] are clamped to the floor and
/// reported via `log::warn!`.
pub fn csp_features(epochs: &EpochSet, bank: &SpatialFilterBank) -> Result<Array2<f64>> {
    let (n_trials, n_time, n_channels) = epochs.epochs.dim();
    if bank.n_channels() != n_channels {
        return Err(Error::Shape(format!(
            "filter bank expects {} channels but the epochs have {n_channels}",
            bank.n_channels()
        )));
    }
    if n_time < 2 {
        return Err(Error::InsufficientData(format!(
            "variance needs at least 2 timepoints per epoch, got {n_time}"
        )));
    }
    let mut features = Array2::zeros((n_trials, bank.n_selected()));
    for trial in 0..n_trials {
        let x = epochs.epochs.index_axis(Axis(0), trial);
        let projected: Array2<f64> = x.dot(&bank.filters);
        for (j, series) in projected.axis_iter(Axis(1)).enumerate() {
            let mean = series.mean().expect("n_time >= 2");
            let var = series.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
                / (n_time - 1) as f64;
            features[[trial, j]] = if var < VARIANCE_FLOOR {
                log::warn!(
                    "trial {trial}, filter {j}: projection variance {var:.3e} below \
                     floor, clamping log-variance feature to ln({VARIANCE_FLOOR:e})"
                );
                VARIANCE_FLOOR.ln()
            } else {
                var.ln()
            };
        }
    }
    Ok(features)
}

/// Project every epoch through the filter bank, yielding per-component time
/// series (`n_trials x n_time x n_selected`). Used when surrogate sources
/// rather than summary features are needed.
pub fn apply_filters(epochs: &EpochSet, bank: &SpatialFilterBank) -> Result<ndarray::Array3<f64>> {
    let (n_trials, n_time, n_channels) = epochs.epochs.dim();
    if bank.n_channels() != n_channels {
        return Err(Error::Shape(format!(
            "filter bank expects {} channels but the epochs have {n_channels}",
            bank.n_channels()
        )));
    }
    let mut out = ndarray::Array3::zeros((n_trials, n_time, bank.n_selected()));
    for trial in 0..n_trials {
        let projected = epochs.epochs.index_axis(Axis(0), trial).dot(&bank.filters);
        out.index_axis_mut(Axis(0), trial).assign(&projected);
    }
    Ok(out)
}
