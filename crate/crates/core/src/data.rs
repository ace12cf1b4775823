//! Core data model: continuous recordings, epoched trials, relevance maps.
//!
//! A [`Recording`] holds a continuous multichannel signal in sample-major
//! order together with cue markers. An [`EpochSet`] holds fixed-length trials
//! cut around markers, each labeled with a class in `{0, 1}`. A
//! [`RelevanceMap`] is a per-trial time × channel matrix of attribution
//! scores produced by the explanation stage.
//!
//! All in-memory numerics are `f64`; the on-disk format (see [`crate::erf`])
//! stores the payload as little-endian `f32`.

use ndarray::{Array1, Array2, Array3};

use crate::error::{Error, Result};

/// A cue marker: sample index into the recording plus an integer class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Marker {
    /// Sample index the cue occurred at.
    pub sample: usize,
    /// Raw class label as found in the source data (not yet normalized).
    pub label: i32,
}

/// Continuous multichannel recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    /// Sampling rate in Hz.
    pub fs: f64,
    /// Channel names, one per column of `samples`.
    pub channels: Vec<String>,
    /// Signal, shape `[n_samples, n_channels]`.
    pub samples: Array2<f64>,
    /// Cue markers, ordered by sample index.
    pub markers: Vec<Marker>,
    /// Free-form metadata carried through the pipeline.
    pub meta: serde_json::Value,
}

impl Recording {
    /// Builds a recording and validates it.
    pub fn new(
        fs: f64,
        channels: Vec<String>,
        samples: Array2<f64>,
        markers: Vec<Marker>,
        meta: serde_json::Value,
    ) -> Result<Self> {
        let rec = Recording { fs, channels, samples, markers, meta };
        rec.validate()?;
        Ok(rec)
    }

    /// Number of samples (rows).
    pub fn n_samples(&self) -> usize {
        self.samples.nrows()
    }

    /// Number of channels (columns).
    pub fn n_channels(&self) -> usize {
        self.samples.ncols()
    }

    /// Checks every documented invariant; returns the first violation.
    pub fn validate(&self) -> Result<()> {
        if !(self.fs.is_finite() && self.fs > 0.0) {
            return Err(Error::Validation(format!("fs must be positive and finite, got {}", self.fs)));
        }
        validate_channel_names(&self.channels)?;
        if self.channels.len() != self.samples.ncols() {
            return Err(Error::Shape(format!(
                "{} channel names but {} sample columns",
                self.channels.len(),
                self.samples.ncols()
            )));
        }
        if let Some(bad) = self.samples.iter().position(|v| !v.is_finite()) {
            let (t, c) = (bad / self.samples.ncols().max(1), bad % self.samples.ncols().max(1));
            return Err(Error::Validation(format!(
                "non-finite sample at (sample {t}, channel {c})"
            )));
        }
        for m in &self.markers {
            if m.sample >= self.n_samples() {
                return Err(Error::Validation(format!(
                    "marker at sample {} outside recording of {} samples",
                    m.sample,
                    self.n_samples()
                )));
            }
        }
        Ok(())
    }
}

/// Set of fixed-length labeled trials, all cut with the same window.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochSet {
    /// Sampling rate in Hz.
    pub fs: f64,
    /// Channel names, one per last-axis entry of `epochs`.
    pub channels: Vec<String>,
    /// Trials, shape `[n_trials, n_timepoints, n_channels]`.
    pub epochs: Array3<f64>,
    /// Time axis in milliseconds relative to the cue; uniform and increasing.
    pub time_ms: Vec<f64>,
    /// Normalized class label per trial, each 0 or 1.
    pub labels: Vec<u8>,
    /// Free-form metadata (e.g. the original label values).
    pub meta: serde_json::Value,
}

impl EpochSet {
    /// Builds an epoch set and validates it.
    pub fn new(
        fs: f64,
        channels: Vec<String>,
        epochs: Array3<f64>,
        time_ms: Vec<f64>,
        labels: Vec<u8>,
        meta: serde_json::Value,
    ) -> Result<Self> {
        let ep = EpochSet { fs, channels, epochs, time_ms, labels, meta };
        ep.validate()?;
        Ok(ep)
    }

    pub fn n_trials(&self) -> usize {
        self.epochs.shape()[0]
    }

    pub fn n_timepoints(&self) -> usize {
        self.epochs.shape()[1]
    }

    pub fn n_channels(&self) -> usize {
        self.epochs.shape()[2]
    }

    /// Checks every documented invariant; returns the first violation.
    pub fn validate(&self) -> Result<()> {
        if !(self.fs.is_finite() && self.fs > 0.0) {
            return Err(Error::Validation(format!("fs must be positive and finite, got {}", self.fs)));
        }
        validate_channel_names(&self.channels)?;
        let (n_trials, n_time, n_chan) =
            (self.epochs.shape()[0], self.epochs.shape()[1], self.epochs.shape()[2]);
        if self.channels.len() != n_chan {
            return Err(Error::Shape(format!(
                "{} channel names but {} epoch channels",
                self.channels.len(),
                n_chan
            )));
        }
        if self.time_ms.len() != n_time {
            return Err(Error::Shape(format!(
                "time axis has {} entries but epochs have {} timepoints",
                self.time_ms.len(),
                n_time
            )));
        }
        if n_time >= 2 {
            let step = self.time_ms[1] - self.time_ms[0];
            if !(step > 0.0) {
                return Err(Error::Validation("time axis must be strictly increasing".into()));
            }
            for i in 2..n_time {
                let d = self.time_ms[i] - self.time_ms[i - 1];
                if (d - step).abs() > 1e-6 * step.abs().max(1.0) {
                    return Err(Error::Validation(format!(
                        "time axis step not uniform at index {i}: {d} vs {step}"
                    )));
                }
            }
        }
        if self.labels.len() != n_trials {
            return Err(Error::Shape(format!(
                "{} labels but {} trials",
                self.labels.len(),
                n_trials
            )));
        }
        if let Some(bad) = self.labels.iter().find(|&&l| l > 1) {
            return Err(Error::Validation(format!("labels must be 0 or 1, got {bad}")));
        }
        if self.epochs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite value in epochs".into()));
        }
        Ok(())
    }

    /// Returns a new set containing only the trials in `indices`, in order.
    pub fn subset(&self, indices: &[usize]) -> Result<EpochSet> {
        let (n_time, n_chan) = (self.n_timepoints(), self.n_channels());
        let mut epochs = Array3::zeros((indices.len(), n_time, n_chan));
        let mut labels = Vec::with_capacity(indices.len());
        for (k, &i) in indices.iter().enumerate() {
            if i >= self.n_trials() {
                return Err(Error::Argument(format!(
                    "trial index {i} out of range for {} trials",
                    self.n_trials()
                )));
            }
            epochs.index_axis_mut(ndarray::Axis(0), k).assign(&self.epochs.index_axis(ndarray::Axis(0), i));
            labels.push(self.labels[i]);
        }
        Ok(EpochSet {
            fs: self.fs,
            channels: self.channels.clone(),
            epochs,
            time_ms: self.time_ms.clone(),
            labels,
            meta: self.meta.clone(),
        })
    }
}

/// Per-trial attribution scores over time and channels.
#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceMap {
    /// Channel names, one per column of `values`.
    pub channels: Vec<String>,
    /// Time axis in milliseconds, one per row of `values`.
    pub time_ms: Vec<f64>,
    /// Scores, shape `[n_timepoints, n_channels]`.
    pub values: Array2<f64>,
    /// Trial the map was computed for.
    pub trial_index: usize,
    /// Class the classifier decoded for this trial.
    pub decoded_class: u8,
    /// Classifier score (probability of class 1).
    pub classifier_score: f64,
    /// Class whose evidence the scores explain.
    pub target_class: u8,
}

impl RelevanceMap {
    /// Builds a map (annotation fields zeroed) and validates axis lengths
    /// against the value matrix.
    pub fn new(channels: Vec<String>, time_ms: Vec<f64>, values: Array2<f64>) -> Result<Self> {
        if channels.len() != values.ncols() {
            return Err(Error::Shape(format!(
                "{} channel names but {} value columns",
                channels.len(),
                values.ncols()
            )));
        }
        if time_ms.len() != values.nrows() {
            return Err(Error::Shape(format!(
                "{} time entries but {} value rows",
                time_ms.len(),
                values.nrows()
            )));
        }
        validate_channel_names(&channels)?;
        Ok(RelevanceMap {
            channels,
            time_ms,
            values,
            trial_index: 0,
            decoded_class: 0,
            classifier_score: 0.0,
            target_class: 0,
        })
    }

    /// Attaches per-trial classifier context to the map.
    pub fn annotate(mut self, trial_index: usize, decoded_class: u8, classifier_score: f64, target_class: u8) -> Self {
        self.trial_index = trial_index;
        self.decoded_class = decoded_class;
        self.classifier_score = classifier_score;
        self.target_class = target_class;
        self
    }
}

fn validate_channel_names(channels: &[String]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for name in channels {
        if name.is_empty() {
            return Err(Error::Validation("empty channel name".into()));
        }
        if !seen.insert(name.as_str()) {
            return Err(Error::Validation(format!("duplicate channel name '{name}'")));
        }
    }
    Ok(())
}

/// Flattens one trial into the classifier input layout.
///
/// The vector is time-major: element `t * n_channels + c` is the sample of
/// channel `c` at timepoint `t`; the length is `n_timepoints * n_channels`.
pub fn vectorize_epoch(epochs: &EpochSet, trial: usize) -> Result<Array1<f64>> {
    if trial >= epochs.n_trials() {
        return Err(Error::Argument(format!(
            "trial index {trial} out of range for {} trials",
            epochs.n_trials()
        )));
    }
    let view = epochs.epochs.index_axis(ndarray::Axis(0), trial);
    // The [time, channel] slice of a standard-layout array is already
    // time-major, so a flat iteration yields exactly the documented order.
    Ok(Array1::from_iter(view.iter().copied()))
}

/// Vectorize every trial at once: row `t` equals `vectorize_epoch(epochs, t)`.
pub fn vectorize_all(epochs: &EpochSet) -> Array2<f64> {
    let (n_trials, n_time, n_channels) = epochs.epochs.dim();
    let flat = epochs
        .epochs
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((n_trials, n_time * n_channels))
        .expect("element count is preserved by reshaping");
    flat
}

/// Inverse of [`vectorize_epoch`]: reshapes a flat vector back to time × channel.
pub fn epoch_from_vector(v: &Array1<f64>, n_timepoints: usize, n_channels: usize) -> Result<Array2<f64>> {
    if v.len() != n_timepoints * n_channels {
        return Err(Error::Shape(format!(
            "vector of length {} cannot form a {n_timepoints} x {n_channels} epoch",
            v.len()
        )));
    }
    Ok(Array2::from_shape_vec((n_timepoints, n_channels), v.to_vec())
        .expect("length checked above"))
}
