//! Synthetic motor-imagery-like recordings with known ground truth.
//!
//! Each trial is a narrowband carrier whose amplitude drops on a declared set
//! of channels while the cue is active — the classic band-power decrease seen
//! over motor cortex during imagined movement — plus white Gaussian noise.
//! Because the discriminative channels are chosen by the caller, generated
//! data comes with an exact answer key: any decoder or relevance method run
//! on it can be scored against the channels that truly carry class
//! information.

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{Marker, Recording};
use crate::error::{Error, Result};
use crate::montage::Montage;

/// Seconds of signal before the first cue.
pub const LEAD_IN_S: f64 = 2.0;
/// Seconds between consecutive cues; leaves ≥ 3 s of untouched signal after
/// each attenuation window so extracted epochs never overlap.
pub const CUE_SPACING_S: f64 = 7.0;
/// Attenuation window relative to the cue, in seconds. Matches the epoch
/// window used by the decoding protocol, so an extracted epoch sees the
/// class effect for its full duration.
pub const EFFECT_WINDOW_S: (f64, f64) = (1.0, 4.0);

/// Everything that determines a generated recording. Doubles as the ground
/// truth returned alongside the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    /// Number of EEG channels.
    pub n_channels: usize,
    /// Trials generated for each of the two classes.
    pub n_trials_per_class: usize,
    /// Sampling rate of the emitted recording, Hz.
    pub fs: f64,
    /// Carrier frequency, Hz. 11 Hz sits mid-band for a 9–13 Hz decoder.
    pub carrier_hz: f64,
    /// Fraction of carrier amplitude removed on a class's channels while its
    /// cue is active; 0 makes the classes identical, 1 silences the carrier.
    pub modulation_depth: f64,
    /// Channel indices carrying the class effect: `[class 0 set, class 1
    /// set]`. Must be disjoint and in range.
    pub discriminative_channels: [BTreeSet<usize>; 2],
    /// Standard deviation of the additive white noise.
    pub noise_sigma: f64,
    /// Root seed; fixes phases, trial order, and noise bitwise.
    pub seed: u64,
}

impl SynthSpec {
    /// A spec with protocol defaults: 100 Hz sampling and an 11 Hz carrier.
    /// Discriminative channel sets start empty; see
    /// [`with_discriminative`](Self::with_discriminative).
    pub fn new(
        n_channels: usize,
        n_trials_per_class: usize,
        modulation_depth: f64,
        noise_sigma: f64,
        seed: u64,
    ) -> Self {
        Self {
            n_channels,
            n_trials_per_class,
            fs: 100.0,
            carrier_hz: 11.0,
            modulation_depth,
            discriminative_channels: [BTreeSet::new(), BTreeSet::new()],
            noise_sigma,
            seed,
        }
    }

    /// Declares which channels carry each class's effect.
    pub fn with_discriminative(
        mut self,
        class0: impl IntoIterator<Item = usize>,
        class1: impl IntoIterator<Item = usize>,
    ) -> Self {
        self.discriminative_channels = [class0.into_iter().collect(), class1.into_iter().collect()];
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_channels == 0 {
            return Err(Error::Validation("n_channels must be at least 1".into()));
        }
        if self.n_trials_per_class == 0 {
            return Err(Error::Validation(
                "n_trials_per_class must be at least 1".into(),
            ));
        }
        if !(self.fs.is_finite() && self.fs > 0.0) {
            return Err(Error::Validation(format!(
                "sampling rate must be positive and finite, got {}",
                self.fs
            )));
        }
        if !(self.carrier_hz.is_finite() && self.carrier_hz > 0.0) {
            return Err(Error::Validation(format!(
                "carrier frequency must be positive and finite, got {}",
                self.carrier_hz
            )));
        }
        if self.carrier_hz >= self.fs / 2.0 {
            return Err(Error::Validation(format!(
                "carrier at {} Hz is not representable at {} Hz sampling \
                 (Nyquist {})",
                self.carrier_hz,
                self.fs,
                self.fs / 2.0
            )));
        }
        if !(self.modulation_depth.is_finite()
            && (0.0..=1.0).contains(&self.modulation_depth))
        {
            return Err(Error::Validation(format!(
                "modulation_depth must lie in [0, 1], got {}",
                self.modulation_depth
            )));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::Validation(format!(
                "noise_sigma must be non-negative and finite, got {}",
                self.noise_sigma
            )));
        }
        for (class, set) in self.discriminative_channels.iter().enumerate() {
            if let Some(&bad) = set.iter().find(|&&c| c >= self.n_channels) {
                return Err(Error::Validation(format!(
                    "class {class} discriminative channel {bad} is out of range \
                     for {} channels",
                    self.n_channels
                )));
            }
        }
        let [set0, set1] = &self.discriminative_channels;
        if let Some(shared) = set0.intersection(set1).next() {
            return Err(Error::Validation(format!(
                "channel {shared} is declared discriminative for both classes; \
                 the sets must be disjoint"
            )));
        }
        Ok(())
    }
}

/// Channel names for a generated recording: real electrode names while the
/// standard montage has enough of them, generic placeholders beyond that.
fn channel_names(n_channels: usize) -> Vec<String> {
    let montage = Montage::standard();
    if n_channels <= montage.len() {
        montage.names()[..n_channels].to_vec()
    } else {
        (1..=n_channels).map(|i| format!("ch{i:03}")).collect()
    }
}

/// Generates a continuous recording with cue markers, returning the spec
/// back as the ground truth an evaluation can score against.
///
/// Randomness (carrier phases, trial order, noise) is drawn from a single
/// stream seeded by `spec.seed` in a fixed order, so identical specs produce
/// bitwise-identical recordings.
pub fn generate(spec: &SynthSpec) -> Result<(Recording, SynthSpec)> {
    spec.validate()?;
    let n_trials = 2 * spec.n_trials_per_class;
    let n_samples = ((LEAD_IN_S + n_trials as f64 * CUE_SPACING_S) * spec.fs).round() as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // 1. One random phase per channel keeps channels linearly independent
    //    even before noise is added.
    let phases: Vec<f64> = (0..spec.n_channels)
        .map(|_| rng.random_range(0.0..TAU))
        .collect();

    // 2. Class labels: a balanced sequence in shuffled order.
    let mut labels: Vec<u8> = (0..n_trials).map(|t| (t % 2) as u8).collect();
    // Fisher-Yates, spelled out so the stream consumption is frozen.
    for i in (1..labels.len()).rev() {
        let j = rng.random_range(0..=i);
        labels.swap(i, j);
    }

    // Carrier, full amplitude everywhere.
    let omega = TAU * spec.carrier_hz / spec.fs;
    let mut samples = Array2::from_shape_fn((n_samples, spec.n_channels), |(t, c)| {
        (omega * t as f64 + phases[c]).sin()
    });

    // Attenuate each trial's class channels while its cue is active.
    let attenuation = 1.0 - spec.modulation_depth;
    let effect_start = (EFFECT_WINDOW_S.0 * spec.fs).round() as usize;
    let effect_end = (EFFECT_WINDOW_S.1 * spec.fs).round() as usize;
    let mut markers = Vec::with_capacity(n_trials);
    for (trial, &label) in labels.iter().enumerate() {
        let cue = ((LEAD_IN_S + trial as f64 * CUE_SPACING_S) * spec.fs).round() as usize;
        markers.push(Marker {
            sample: cue,
            label: i32::from(label),
        });
        for t in cue + effect_start..=cue + effect_end {
            for &c in &spec.discriminative_channels[label as usize] {
                samples[[t, c]] *= attenuation;
            }
        }
    }

    // 3. Additive white noise, drawn row-major.
    if spec.noise_sigma > 0.0 {
        for v in samples.iter_mut() {
            *v += spec.noise_sigma * rng.sample::<f64, _>(StandardNormal);
        }
    }

    let recording = Recording::new(
        spec.fs,
        channel_names(spec.n_channels),
        samples,
        markers,
        serde_json::json!({ "generator": spec }),
    )?;
    Ok((recording, spec.clone()))
}
