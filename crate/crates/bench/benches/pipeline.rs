//! Hot-path benchmarks: filtering, envelopes, spatial filters, network
//! training steps, and relevance propagation.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ndarray::Array2;

use lrpeeg::{
    bandpass, batch_gradients, class_covariances, csp_decompose, envelope, init_model,
    relevance_propagate, vectorize_epoch, BandpassSpec, LrpConfig,
};
use lrpeeg_bench::{continuous_recording, small_epochs};

fn bench_bandpass(c: &mut Criterion) {
    let recording = continuous_recording();
    let spec = BandpassSpec::new(9.0, 13.0);
    c.bench_function("bandpass 16ch 58s", |b| {
        b.iter(|| bandpass(black_box(&recording), black_box(&spec)).unwrap())
    });
}

fn bench_envelope(c: &mut Criterion) {
    let epochs = small_epochs();
    c.bench_function("envelope 16x301x8", |b| {
        b.iter(|| envelope(black_box(&epochs)).unwrap())
    });
}

fn bench_csp(c: &mut Criterion) {
    let epochs = small_epochs();
    let (sigma0, sigma1) = class_covariances(&epochs).unwrap();
    // Spatial filtering cost is dominated by the eigendecompositions, so
    // bench a realistically wide 64-channel composite too.
    let wide0 = Array2::from_shape_fn((64, 64), |(r, c)| {
        let base = if r == c { 2.0 } else { 0.0 };
        base + 0.5 / (1.0 + (r as f64 - c as f64).abs())
    });
    let wide1 = Array2::from_shape_fn((64, 64), |(r, c)| {
        let base = if r == c { 1.5 + 0.01 * r as f64 } else { 0.0 };
        base + 0.3 / (1.0 + 2.0 * (r as f64 - c as f64).abs())
    });
    c.bench_function("csp_decompose 8ch", |b| {
        b.iter(|| csp_decompose(black_box(&sigma0), black_box(&sigma1), 3).unwrap())
    });
    c.bench_function("csp_decompose 64ch", |b| {
        b.iter(|| csp_decompose(black_box(&wide0), black_box(&wide1), 3).unwrap())
    });
}

fn bench_training_step(c: &mut Criterion) {
    let epochs = small_epochs();
    let n_input = epochs.n_timepoints() * epochs.n_channels();
    let model = init_model(n_input, 3).unwrap();
    let batch = Array2::from_shape_fn((5, n_input), |(r, i)| {
        epochs.epochs[[r % epochs.n_trials(), i / epochs.n_channels(), i % epochs.n_channels()]]
    });
    let labels = [0_u8, 1, 0, 1, 0];
    c.bench_function("gradient step batch 5, 2408-500-2", |b| {
        b.iter(|| batch_gradients(black_box(&model), black_box(&batch), black_box(&labels)).unwrap())
    });
}

fn bench_relevance(c: &mut Criterion) {
    let epochs = small_epochs();
    let n_input = epochs.n_timepoints() * epochs.n_channels();
    let model = init_model(n_input, 4).unwrap();
    let cfg = LrpConfig::default();
    // Touch the vectorization once so shape errors surface before timing.
    vectorize_epoch(&epochs, 0).unwrap();
    c.bench_function("relevance_propagate 2408-500-2", |b| {
        b.iter(|| relevance_propagate(black_box(&model), black_box(&epochs), 0, &cfg).unwrap())
    });
}

criterion_group!(
    benches,
    bench_bandpass,
    bench_envelope,
    bench_csp,
    bench_training_step,
    bench_relevance
);
criterion_main!(benches);
