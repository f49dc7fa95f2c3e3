//! Sharded aggregation: `k` identical sketches fed round-robin, folded by
//! bucket-wise maximum before a single estimation pass.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::{estimate, EstimateReport};
use crate::profiler::permute_u32;
use crate::sketch::{HllSketch, SketchConfig};

/// Largest pipeline count the engine is tested against.
pub const MAX_TESTED_PIPELINES: usize = 16;

// Batches shorter than this are applied on the calling thread.
const PARALLEL_BATCH_MIN: usize = 1 << 12;

/// `k` aggregation pipelines over one configuration.
///
/// Word `j` of the global stream goes to shard `j mod k`. Feeding takes
/// `&mut self` and finalizing takes `&self`, so the borrow checker enforces
/// that all feeding has completed before the fold.
#[derive(Debug, Clone)]
pub struct PipelineEngine {
    config: SketchConfig,
    shards: Vec<HllSketch>,
    processed: Vec<u64>,
    cursor: u64,
}

impl PipelineEngine {
    pub fn new(config: SketchConfig, pipelines: usize) -> Result<Self> {
        if pipelines == 0 {
            return Err(Error::NoPipelines);
        }
        Ok(PipelineEngine {
            config,
            shards: vec![HllSketch::new(config); pipelines],
            processed: vec![0; pipelines],
            cursor: 0,
        })
    }

    pub fn config(&self) -> &SketchConfig {
        &self.config
    }

    pub fn pipelines(&self) -> usize {
        self.shards.len()
    }

    pub fn shards(&self) -> &[HllSketch] {
        &self.shards
    }

    /// Items routed to each shard so far.
    pub fn processed(&self) -> &[u64] {
        &self.processed
    }

    /// Items fed so far.
    pub fn total_fed(&self) -> u64 {
        self.cursor
    }

    /// Routes `batch` round-robin across the shards, continuing from where the
    /// previous batch stopped.
    pub fn feed(&mut self, batch: &[u32]) {
        self.feed_with(batch, |sketch, &word| sketch.update_word(word));
    }

    /// Byte-item counterpart of [`PipelineEngine::feed`].
    pub fn feed_items<T: AsRef<[u8]> + Sync>(&mut self, batch: &[T]) {
        self.feed_with(batch, |sketch, item| sketch.update(item.as_ref()));
    }

    fn feed_with<T, F>(&mut self, batch: &[T], apply: F)
    where
        T: Sync,
        F: Fn(&mut HllSketch, &T) + Sync,
    {
        if batch.is_empty() {
            return;
        }
        let k = self.shards.len();
        let offset = (self.cursor % k as u64) as usize;
        let run = |(shard, (sketch, count)): (usize, (&mut HllSketch, &mut u64))| {
            // first position in this batch whose global index is `shard` mod k
            let start = (shard + k - offset) % k;
            let mut n = 0;
            for item in batch.iter().skip(start).step_by(k) {
                apply(sketch, item);
                n += 1;
            }
            *count += n;
        };

        let lanes = self.shards.iter_mut().zip(self.processed.iter_mut());
        if k > 1 && batch.len() >= PARALLEL_BATCH_MIN {
            lanes
                .enumerate()
                .collect::<Vec<_>>()
                .into_par_iter()
                .for_each(run);
        } else {
            lanes.enumerate().for_each(run);
        }
        self.cursor += batch.len() as u64;
    }

    /// Left fold of the shard sketches under bucket-wise maximum.
    pub fn merged(&self) -> HllSketch {
        let mut shards = self.shards.iter();
        let mut acc = shards.next().expect("at least one shard").clone();
        for shard in shards {
            acc.merge_from(shard)
                .expect("shards share one configuration");
        }
        acc
    }

    /// Folds the shards and runs the estimator on the merged sketch.
    pub fn finalize(&self) -> EstimateReport {
        estimate(&self.merged())
    }
}

/// Minimum synthetic volume for a timing run.
pub const MIN_BENCH_BYTES: u64 = 64 << 20;

// Words handed to `feed` per call during a benchmark.
const BENCH_BATCH_WORDS: usize = 1 << 18;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub k: usize,
    pub run_id: usize,
    pub words: u64,
    pub seconds: f64,
    pub words_per_second: f64,
    pub bytes_per_second: f64,
}

/// Times aggregation of `volume_bytes` of synthetic 32-bit words for each
/// pipeline count in `pipelines`, `repetitions` times each.
///
/// Data is generated up front so no I/O or generation cost is timed. Each run
/// covers feeding plus the final fold and estimate.
pub fn bench(
    config: SketchConfig,
    pipelines: &[usize],
    volume_bytes: u64,
    repetitions: usize,
) -> Result<Vec<BenchRecord>> {
    if volume_bytes < MIN_BENCH_BYTES {
        return Err(Error::VolumeBelowMinimum {
            volume: volume_bytes,
            minimum: MIN_BENCH_BYTES,
        });
    }
    if pipelines.contains(&0) {
        return Err(Error::NoPipelines);
    }
    let words = (volume_bytes / 4) as usize;
    let key = 0x5eed_0000_0000_0001;
    let data: Vec<u32> = (0..words as u32).map(|i| permute_u32(i, key)).collect();

    let mut rows = Vec::with_capacity(pipelines.len() * repetitions);
    for &k in pipelines {
        for run_id in 0..repetitions {
            let mut engine = PipelineEngine::new(config, k)?;
            let start = Instant::now();
            for chunk in data.chunks(BENCH_BATCH_WORDS) {
                engine.feed(chunk);
            }
            let report = engine.finalize();
            let seconds = start.elapsed().as_secs_f64();
            std::hint::black_box(report);
            rows.push(BenchRecord {
                k,
                run_id,
                words: words as u64,
                seconds,
                words_per_second: words as f64 / seconds,
                bytes_per_second: (words * 4) as f64 / seconds,
            });
        }
    }
    Ok(rows)
}

/// Writes `k,run_id,words,seconds,words_per_second,bytes_per_second` CSV.
pub fn write_bench_csv<W: Write>(out: W, rows: &[BenchRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
