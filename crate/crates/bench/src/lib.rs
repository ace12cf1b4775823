//! Shared fixtures for the pipeline benchmarks: deterministic synthetic
//! inputs sized like real decoding workloads.

use lrpeeg::{generate, EpochSet, Recording, SynthSpec};

/// A 16-channel, ~2-minute continuous recording with a mid-band effect.
pub fn continuous_recording() -> Recording {
    let spec = SynthSpec::new(16, 8, 0.7, 0.5, 1).with_discriminative([1, 2], [8, 9]);
    generate(&spec).expect("benchmark fixture must generate").0
}

/// Band-limited epochs: 16 trials × 301 timepoints × 8 channels.
pub fn small_epochs() -> EpochSet {
    let spec = SynthSpec::new(8, 8, 0.7, 0.5, 2).with_discriminative([1, 2], [5, 6]);
    let recording = generate(&spec).expect("benchmark fixture must generate").0;
    let filtered = lrpeeg::bandpass(&recording, &lrpeeg::BandpassSpec::new(9.0, 13.0))
        .expect("benchmark fixture must filter");
    lrpeeg::extract_epochs(&filtered, (1000.0, 4000.0), [0, 1])
        .expect("benchmark fixture must epoch")
}
