//! HyperLogLog cardinality estimation.
//!
//! The crate follows the four phases of the algorithm: [`hash`] randomizes
//! items with Murmur3, [`sketch`] keeps the per-bucket maximum ranks,
//! [`estimator`] turns the registers into a cardinality estimate, and
//! [`pipeline`] shards aggregation across `k` independent sketches that are
//! merged before estimation. [`profiler`] measures relative error on synthetic
//! streams.
//!
//! ```
//! use hll_core::{estimate, HashWidth, HllSketch, SketchConfig};
//!
//! let config = SketchConfig::new(14, HashWidth::H64, 0).unwrap();
//! let mut sketch = HllSketch::new(config);
//! for i in 0..10_000u32 {
//!     sketch.update_word(i);
//! }
//! let report = estimate(&sketch);
//! assert!((report.estimate - 10_000.0).abs() < 500.0);
//! ```

pub mod error;
pub mod estimator;
pub mod hash;
pub mod pipeline;
pub mod profiler;
pub mod sketch;

pub use error::{Error, Result};
pub use estimator::{
    alpha, estimate, harmonic_sum, large_range_correction, linear_counting, raw_estimate,
    zero_census, Correction, EstimateReport, ExactHarmonicSum, LARGE_RANGE_THRESHOLD,
};
pub use hash::{hash_bytes, hash_word, murmur3_32, murmur3_64, HashValue, HashWidth};
pub use pipeline::{bench, write_bench_csv, BenchRecord, PipelineEngine, MIN_BENCH_BYTES};
pub use profiler::{
    run_profile, synth_stream, theoretical_error, ErrorCurvePoint, ProfileResult, ProfileSpec,
    SummaryRow,
};
pub use sketch::{
    footprint_bits, rank, split_hash, HllSketch, SketchConfig, MAX_PRECISION, MIN_PRECISION,
};
