//! Shared fixtures for the criterion benchmarks.

use hll_core::synth_stream;

/// `n` distinct pseudo-random words, identical across runs.
pub fn words(n: u64) -> Vec<u32> {
    synth_stream(n, 0xbe4c)
        .expect("n fits the 32-bit domain")
        .collect()
}
