//! Deterministic inputs shared by the pipeline benchmarks.

use cdrsight_core::seed::mix;
use cdrsight_core::synth::{self, SynthConfig};
use cdrsight_core::series::bucketize;
use cdrsight_core::{ActivitySeries, Metric};

/// Hourly event-count series of the default synthetic week.
pub fn synthetic_series(seed: u64) -> ActivitySeries {
    let corpus = synth::generate(&SynthConfig {
        seed,
        ..SynthConfig::default()
    });
    bucketize(&corpus.events, synth::SYNTH_BUCKET_WIDTH_S, Metric::EventCount)
        .expect("synthetic corpus is non-empty")
}

/// AR(1) with coefficient `phi` driven by centred uniform noise.
pub fn ar1(n: usize, phi: f64, seed: u64) -> Vec<f64> {
    let mut state = mix(seed);
    let mut x = 0.0;
    (0..n)
        .map(|_| {
            state = mix(state);
            let u = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            x = phi * x + u;
            x
        })
        .collect()
}

/// Running sum of [`ar1`] noise with `phi = 0`.
pub fn random_walk(n: usize, seed: u64) -> Vec<f64> {
    ar1(n, 0.0, seed)
        .into_iter()
        .scan(0.0, |s, e| {
            *s += e;
            Some(*s)
        })
        .collect()
}
