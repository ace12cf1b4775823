//! Signal conditioning: resampling, band-pass filtering, epoching,
//! amplitude-envelope extraction, and baseline correction.
//!
//! All filtering is zero-phase: a linear-phase FIR kernel is applied once and
//! the group delay is compensated exactly, with reflected samples padding the
//! borders so the output has the same length as the input. Envelopes come
//! from the magnitude of the analytic signal (FFT-based Hilbert transform),
//! again with reflection padding to suppress edge transients.

use ndarray::{Array2, Array3, Axis};
use rustfft::{num_complex::Complex, FftPlanner};

use crate::data::{EpochSet, Recording};
use crate::error::{Error, Result};

/// Band-pass filter description: pass-band edges in hertz plus an optional
/// kernel length override.
///
/// The kernel is a windowed-sinc FIR (Hamming window) built as the difference
/// of two low-pass prototypes. Edge frequencies are interpreted as the points
/// where the pass-band should still be intact; the design widens the raw
/// cutoffs by half the window's transition width so the requested band sits
/// inside the flat region rather than on the roll-off.
#[derive(Debug, Clone, PartialEq)]
pub struct BandpassSpec {
    /// Lower pass-band edge in Hz. Must satisfy `0 < low_hz < high_hz`.
    pub low_hz: f64,
    /// Upper pass-band edge in Hz. Must stay below the Nyquist frequency.
    pub high_hz: f64,
    /// FIR kernel length (must be odd). `None` picks a default long enough
    /// for roughly 0.8 Hz transition bands: the next odd integer at or above
    /// `2 * fs + 1`.
    pub n_taps: Option<usize>,
}

impl BandpassSpec {
    /// Band edges with the default kernel length.
    pub fn new(low_hz: f64, high_hz: f64) -> Self {
        Self {
            low_hz,
            high_hz,
            n_taps: None,
        }
    }

    /// Band edges with an explicit odd kernel length.
    pub fn with_taps(low_hz: f64, high_hz: f64, n_taps: usize) -> Self {
        Self {
            low_hz,
            high_hz,
            n_taps: Some(n_taps),
        }
    }

    /// Kernel length that will be used at sampling rate `fs`.
    pub fn resolve_taps(&self, fs: f64) -> usize {
        self.n_taps.unwrap_or_else(|| {
            let mut n = (2.0 * fs).round() as usize + 1;
            if n % 2 == 0 {
                n += 1;
            }
            n
        })
    }

    fn validate(&self, fs: f64) -> Result<usize> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::Validation(format!(
                "sampling rate must be positive and finite, got {fs}"
            )));
        }
        if !(self.low_hz.is_finite() && self.high_hz.is_finite()) {
            return Err(Error::Validation(
                "band edges must be finite".to_string(),
            ));
        }
        if !(0.0 < self.low_hz && self.low_hz < self.high_hz) {
            return Err(Error::Validation(format!(
                "band edges must satisfy 0 < low < high, got low={} high={}",
                self.low_hz, self.high_hz
            )));
        }
        let nyquist = fs / 2.0;
        if self.high_hz >= nyquist {
            return Err(Error::Validation(format!(
                "upper band edge {} Hz must lie below the Nyquist frequency {} Hz",
                self.high_hz, nyquist
            )));
        }
        let n_taps = self.resolve_taps(fs);
        if n_taps % 2 == 0 {
            return Err(Error::Validation(format!(
                "FIR kernel length must be odd for exact zero-phase delay \
                 compensation, got {}; use {} or {}",
                n_taps,
                n_taps - 1,
                n_taps + 1
            )));
        }
        if n_taps < 3 {
            return Err(Error::Validation(format!(
                "FIR kernel needs at least 3 taps, got {n_taps}"
            )));
        }
        // The design widens each cutoff by half a transition width; that
        // widened band must still fit between 0 and Nyquist.
        let widen = transition_halfwidth(fs, n_taps);
        if self.low_hz - widen <= 0.0 {
            return Err(Error::Validation(format!(
                "transition band ({widen:.3} Hz) reaches below 0 Hz for a {} Hz \
                 lower edge; increase n_taps",
                self.low_hz
            )));
        }
        if self.high_hz + widen >= nyquist {
            return Err(Error::Validation(format!(
                "transition band ({widen:.3} Hz) reaches past Nyquist for a {} Hz \
                 upper edge; increase n_taps or lower the edge",
                self.high_hz
            )));
        }
        Ok(n_taps)
    }
}

/// Half of the Hamming-window FIR transition width in Hz.
///
/// A Hamming-windowed sinc rolls off over roughly `3.3 / n_taps` of the
/// sampling rate; half of that is how far each nominal cutoff is pushed
/// outward so the requested edge keeps full gain.
fn transition_halfwidth(fs: f64, n_taps: usize) -> f64 {
    1.65 * fs / n_taps as f64
}

fn hamming(n: usize) -> Vec<f64> {
    let m = (n - 1) as f64;
    (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * std::f64::consts::PI * i as f64 / m).cos())
        .collect()
}

/// Windowed-sinc low-pass kernel (Hamming window, odd length, unit DC gain
/// before windowing). `cutoff_hz` is the -6 dB point.
fn lowpass_taps(cutoff_hz: f64, fs: f64, n_taps: usize) -> Vec<f64> {
    debug_assert!(n_taps % 2 == 1);
    let mid = (n_taps / 2) as isize;
    let fc = cutoff_hz / fs; // cycles per sample
    let window = hamming(n_taps);
    (0..n_taps)
        .map(|i| {
            let k = i as isize - mid;
            let sinc = if k == 0 {
                2.0 * fc
            } else {
                let x = std::f64::consts::PI * k as f64;
                (2.0 * fc * x).sin() / x
            };
            sinc * window[i]
        })
        .collect()
}

/// Design the band-pass FIR kernel that [`bandpass`] applies at sampling rate
/// `fs`. Exposed so the frequency response can be inspected directly.
pub fn bandpass_taps(spec: &BandpassSpec, fs: f64) -> Result<Vec<f64>> {
    let n_taps = spec.validate(fs)?;
    let widen = transition_halfwidth(fs, n_taps);
    let low = lowpass_taps(spec.low_hz - widen, fs, n_taps);
    let high = lowpass_taps(spec.high_hz + widen, fs, n_taps);
    Ok(high
        .iter()
        .zip(&low)
        .map(|(h, l)| h - l)
        .collect())
}

/// Reflect a signal about its first and last samples (no edge repetition):
/// `[x1..xp reversed] ++ x ++ [x(n-1-p)..x(n-2) reversed]`.
fn reflect_pad(x: &[f64], pad: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if pad >= n {
        return Err(Error::InsufficientData(format!(
            "signal of {n} samples is too short for {pad}-sample reflection \
             padding; shorten the filter kernel or provide more samples"
        )));
    }
    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend(x[1..=pad].iter().rev());
    ext.extend_from_slice(x);
    ext.extend(x[n - 1 - pad..n - 1].iter().rev());
    Ok(ext)
}

/// Apply an odd-length linear-phase kernel with exact group-delay
/// compensation and reflection padding. Output length equals input length.
fn filter_zero_phase(x: &[f64], taps: &[f64]) -> Result<Vec<f64>> {
    debug_assert!(taps.len() % 2 == 1);
    let delay = taps.len() / 2;
    let ext = reflect_pad(x, delay)?;
    let n = x.len();
    let full = taps.len() - 1; // == 2 * delay
    let mut out = vec![0.0; n];
    for (i, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, t) in taps.iter().enumerate() {
            acc += t * ext[i + full - j];
        }
        *slot = acc;
    }
    Ok(out)
}

/// Band-pass filter every channel of a recording with a zero-phase FIR.
/// Sampling rate, markers, channel names, and metadata pass through.
pub fn bandpass(recording: &Recording, spec: &BandpassSpec) -> Result<Recording> {
    let taps = bandpass_taps(spec, recording.fs)?;
    let mut samples = recording.samples.clone();
    for mut column in samples.axis_iter_mut(Axis(1)) {
        let x: Vec<f64> = column.iter().copied().collect();
        let y = filter_zero_phase(&x, &taps)?;
        for (dst, src) in column.iter_mut().zip(&y) {
            *dst = *src;
        }
    }
    Recording::new(
        recording.fs,
        recording.channels.clone(),
        samples,
        recording.markers.clone(),
        recording.meta.clone(),
    )
}

/// Cutoff of the anti-alias low-pass applied before downsampling, as a
/// fraction of the target Nyquist frequency.
const ANTIALIAS_BAND_FRACTION: f64 = 0.8;

/// Downsample a recording to `target_fs` by an integer factor: anti-alias
/// low-pass (cutoff at 80% of the target Nyquist), then keep every k-th
/// sample. Marker positions divide by the factor (rounding down). A factor
/// of 1 returns the recording unchanged — no filtering.
pub fn decimate(recording: &Recording, target_fs: f64) -> Result<Recording> {
    if !(target_fs.is_finite() && target_fs > 0.0) {
        return Err(Error::Validation(format!(
            "target sampling rate must be positive and finite, got {target_fs}"
        )));
    }
    let ratio = recording.fs / target_fs;
    let k = ratio.round();
    if k < 1.0 || (ratio - k).abs() > 1e-9 {
        return Err(Error::UnsupportedRate {
            from_hz: recording.fs,
            to_hz: target_fs,
        });
    }
    let k = k as usize;
    if k == 1 {
        return Ok(recording.clone());
    }

    let cutoff = ANTIALIAS_BAND_FRACTION * target_fs / 2.0;
    let mut n_taps = (2.0 * recording.fs).round() as usize + 1;
    if n_taps % 2 == 0 {
        n_taps += 1;
    }
    let taps = lowpass_taps(cutoff, recording.fs, n_taps);

    let n_out = recording.samples.nrows().div_ceil(k);
    let n_channels = recording.samples.ncols();
    let mut samples = Array2::zeros((n_out, n_channels));
    for (c, column) in recording.samples.axis_iter(Axis(1)).enumerate() {
        let x: Vec<f64> = column.iter().copied().collect();
        let y = filter_zero_phase(&x, &taps)?;
        for (i, row) in (0..x.len()).step_by(k).enumerate() {
            samples[[i, c]] = y[row];
        }
    }
    let markers = recording
        .markers
        .iter()
        .map(|m| crate::data::Marker {
            sample: m.sample / k,
            label: m.label,
        })
        .collect();
    Recording::new(
        target_fs,
        recording.channels.clone(),
        samples,
        markers,
        recording.meta.clone(),
    )
}

/// Cut fixed-length windows around markers whose labels appear in `classes`,
/// in marker order.
///
/// The window `(start_ms, end_ms)` is relative to each marker; it spans
/// `round((end_ms - start_ms) / 1000 * fs) + 1` samples, inclusive of both
/// ends. Labels are normalized to 0/1 (`classes[0]` maps to 0, `classes[1]`
/// to 1) and the original pair is recorded under `meta["original_labels"]`.
/// Markers with other labels are ignored. Windows that would reach outside
/// the recording make the whole call fail, naming the offending trials.
pub fn extract_epochs(
    recording: &Recording,
    window_ms: (f64, f64),
    classes: [i32; 2],
) -> Result<EpochSet> {
    let (start_ms, end_ms) = window_ms;
    if !(start_ms.is_finite() && end_ms.is_finite() && start_ms < end_ms) {
        return Err(Error::Validation(format!(
            "epoch window must satisfy start < end, got ({start_ms}, {end_ms}) ms"
        )));
    }
    if classes[0] == classes[1] {
        return Err(Error::Validation(format!(
            "the two class labels must differ, got {} twice",
            classes[0]
        )));
    }
    let fs = recording.fs;
    let n_timepoints = ((end_ms - start_ms) / 1000.0 * fs).round() as usize + 1;
    let start_offset = (start_ms / 1000.0 * fs).round() as i64;
    let n_samples = recording.samples.nrows() as i64;
    let n_channels = recording.samples.ncols();

    let selected: Vec<(usize, u8)> = recording
        .markers
        .iter()
        .filter_map(|m| {
            if m.label == classes[0] {
                Some((m.sample, 0))
            } else if m.label == classes[1] {
                Some((m.sample, 1))
            } else {
                None
            }
        })
        .collect();

    let out_of_range: Vec<usize> = selected
        .iter()
        .enumerate()
        .filter_map(|(trial, (sample, _))| {
            let first = *sample as i64 + start_offset;
            let last = first + n_timepoints as i64 - 1;
            (first < 0 || last >= n_samples).then_some(trial)
        })
        .collect();
    if !out_of_range.is_empty() {
        return Err(Error::EpochOutOfRange {
            trials: out_of_range,
        });
    }

    let n_trials = selected.len();
    let mut epochs = Array3::zeros((n_trials, n_timepoints, n_channels));
    let mut labels = Vec::with_capacity(n_trials);
    for (trial, (sample, label)) in selected.iter().enumerate() {
        labels.push(*label);
        let first = (*sample as i64 + start_offset) as usize;
        epochs
            .index_axis_mut(Axis(0), trial)
            .assign(&recording.samples.slice(ndarray::s![first..first + n_timepoints, ..]));
    }
    let time_ms: Vec<f64> = (0..n_timepoints)
        .map(|i| start_ms + i as f64 * 1000.0 / fs)
        .collect();

    let mut meta = recording.meta.clone();
    if !meta.is_object() {
        meta = serde_json::json!({});
    }
    meta.as_object_mut()
        .expect("meta was just coerced to an object")
        .insert(
            "original_labels".to_string(),
            serde_json::json!([classes[0], classes[1]]),
        );

    EpochSet::new(fs, recording.channels.clone(), epochs, time_ms, labels, meta)
}

/// Amplitude envelope of every trial and channel: magnitude of the analytic
/// signal, computed with an FFT Hilbert transform on a reflection-padded
/// copy (half the epoch length on each side) to suppress edge transients.
pub fn envelope(epochs: &EpochSet) -> Result<EpochSet> {
    let n_time = epochs.epochs.dim().1;
    if n_time < 3 {
        return Err(Error::InsufficientData(format!(
            "envelope needs at least 3 timepoints per epoch, got {n_time}"
        )));
    }
    let pad = n_time / 2;
    let n_ext = n_time + 2 * pad;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n_ext);
    let ifft = planner.plan_fft_inverse(n_ext);

    let mut out = epochs.epochs.clone();
    for mut trial in out.axis_iter_mut(Axis(0)) {
        for mut column in trial.axis_iter_mut(Axis(1)) {
            let x: Vec<f64> = column.iter().copied().collect();
            let ext = reflect_pad(&x, pad)?;
            let env = analytic_magnitude(&ext, fft.as_ref(), ifft.as_ref());
            for (dst, src) in column.iter_mut().zip(&env[pad..pad + n_time]) {
                *dst = *src;
            }
        }
    }
    EpochSet::new(
        epochs.fs,
        epochs.channels.clone(),
        out,
        epochs.time_ms.clone(),
        epochs.labels.clone(),
        epochs.meta.clone(),
    )
}

/// |analytic signal| via the FFT: double the positive-frequency bins, keep DC
/// (and Nyquist for even lengths), zero the negative-frequency bins.
fn analytic_magnitude(
    x: &[f64],
    fft: &dyn rustfft::Fft<f64>,
    ifft: &dyn rustfft::Fft<f64>,
) -> Vec<f64> {
    let n = x.len();
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft.process(&mut buf);
    let half = n / 2;
    if n % 2 == 0 {
        for bin in buf.iter_mut().take(half).skip(1) {
            *bin *= 2.0;
        }
        for bin in buf.iter_mut().skip(half + 1) {
            *bin = Complex::new(0.0, 0.0);
        }
    } else {
        for bin in buf.iter_mut().take(half + 1).skip(1) {
            *bin *= 2.0;
        }
        for bin in buf.iter_mut().skip(half + 1) {
            *bin = Complex::new(0.0, 0.0);
        }
    }
    ifft.process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| (c * scale).norm()).collect()
}

/// Subtract each trial-and-channel's mean over a baseline window.
///
/// `baseline` must describe the same trials (same count, labels, channels,
/// sampling rate) as `epochs`; its per-trial, per-channel scalar mean over
/// time is removed from the corresponding series in `epochs`.
pub fn baseline_subtract(epochs: &EpochSet, baseline: &EpochSet) -> Result<EpochSet> {
    let (n_trials, _, n_channels) = epochs.epochs.dim();
    let (b_trials, b_time, b_channels) = baseline.epochs.dim();
    if b_trials != n_trials || b_channels != n_channels {
        return Err(Error::Shape(format!(
            "baseline shape ({b_trials} trials x {b_channels} channels) does not \
             match epochs ({n_trials} trials x {n_channels} channels)"
        )));
    }
    if baseline.labels != epochs.labels {
        return Err(Error::Validation(
            "baseline trials carry different labels than the epochs they correct"
                .to_string(),
        ));
    }
    if b_time == 0 {
        return Err(Error::InsufficientData(
            "baseline window contains no timepoints".to_string(),
        ));
    }
    let mut out = epochs.epochs.clone();
    for trial in 0..n_trials {
        for channel in 0..n_channels {
            let mean = baseline
                .epochs
                .slice(ndarray::s![trial, .., channel])
                .mean()
                .expect("baseline window verified non-empty");
            out.slice_mut(ndarray::s![trial, .., channel])
                .mapv_inplace(|v| v - mean);
        }
    }
    EpochSet::new(
        epochs.fs,
        epochs.channels.clone(),
        out,
        epochs.time_ms.clone(),
        epochs.labels.clone(),
        epochs.meta.clone(),
    )
}
