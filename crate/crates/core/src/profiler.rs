//! Standard-error profiling over synthetic streams of distinct 32-bit words.
//!
//! Each trial owns one growing sketch per `(p, H)` and is estimated at every
//! checkpoint, so the estimate at `n_i` covers exactly the first `n_i`
//! distinct words of the trial's stream.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::estimate;
use crate::hash::HashWidth;
use crate::sketch::{HllSketch, SketchConfig, MAX_PRECISION, MIN_PRECISION};

const DOMAIN: u64 = 1 << 32;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Keyed bijection on `u32`.
///
/// Every step (xor with a constant, multiplication by an odd constant,
/// xor-shift right, addition) is invertible modulo 2^32.
#[inline]
pub fn permute_u32(x: u32, key: u64) -> u32 {
    let k0 = key as u32;
    let k1 = (key >> 32) as u32;
    let mut x = x ^ k0;
    x = x.wrapping_mul(0x7feb_352d);
    x ^= x >> 15;
    x = x.wrapping_add(k1);
    x = x.wrapping_mul(0x846c_a68b);
    x ^= x >> 16;
    x = x.wrapping_add(k0.rotate_left(16));
    x = x.wrapping_mul(0x2c1b_3c6d);
    x ^= x >> 13;
    x
}

/// Seeded stream of `n` distinct 32-bit words drawn from `[0, 2^32 - 1]`,
/// optionally with repeats of earlier words interleaved.
#[derive(Debug, Clone)]
pub struct SynthStream {
    distinct: u64,
    key: u64,
    next: u64,
    duplication: u32,
    pending_dups: u32,
    dup_state: u64,
}

/// `n` distinct words keyed by `seed`, each emitted once.
pub fn synth_stream(n: u64, seed: u64) -> Result<SynthStream> {
    if n > DOMAIN {
        return Err(Error::DomainExhausted(n));
    }
    Ok(SynthStream {
        distinct: n,
        key: splitmix64(seed),
        next: 0,
        duplication: 1,
        pending_dups: 0,
        dup_state: seed ^ 0xd1b5_4a32_d192_ed03,
    })
}

impl SynthStream {
    /// Emits every distinct word followed by `factor - 1` repeats of words
    /// already emitted. The distinct set is unchanged.
    pub fn with_duplication(mut self, factor: u32) -> Self {
        self.duplication = factor.max(1);
        self
    }

    pub fn distinct(&self) -> u64 {
        self.distinct
    }
}

impl Iterator for SynthStream {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.pending_dups > 0 {
            self.pending_dups -= 1;
            self.dup_state = splitmix64(self.dup_state);
            let j = self.dup_state % self.next;
            return Some(permute_u32(j as u32, self.key));
        }
        if self.next >= self.distinct {
            return None;
        }
        let word = permute_u32(self.next as u32, self.key);
        self.next += 1;
        self.pending_dups = self.duplication - 1;
        Some(word)
    }
}

/// `1.04 / sqrt(2^p)`.
pub fn theoretical_error(precision: u8) -> Result<f64> {
    if !(MIN_PRECISION..=MAX_PRECISION).contains(&precision) {
        return Err(Error::PrecisionOutOfRange(precision));
    }
    Ok(1.04 / ((1u64 << precision) as f64).sqrt())
}

/// Log-spaced checkpoints from `lo` to `hi` inclusive, `per_decade` per
/// factor of ten, rounded to integers and deduplicated.
pub fn log_grid(lo: u64, hi: u64, per_decade: u32) -> Vec<u64> {
    assert!(lo >= 1 && hi >= lo && per_decade >= 1);
    let (a, b) = ((lo as f64).log10(), (hi as f64).log10());
    let steps = ((b - a) * per_decade as f64).round() as u32;
    let mut out: Vec<u64> = (0..=steps)
        .map(|i| {
            let e = a + (b - a) * i as f64 / steps.max(1) as f64;
            10f64.powf(e).round() as u64
        })
        .collect();
    out[0] = lo;
    *out.last_mut().unwrap() = hi;
    out.dedup();
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSpec {
    pub precisions: Vec<u8>,
    pub widths: Vec<HashWidth>,
    pub checkpoints: Vec<u64>,
    pub trials: u32,
    pub base_seed: u64,
    pub hash_seed: u32,
}

impl Default for ProfileSpec {
    fn default() -> Self {
        ProfileSpec {
            precisions: vec![14, 16],
            widths: vec![HashWidth::H32, HashWidth::H64],
            checkpoints: log_grid(1_000, 100_000_000, 4),
            trials: 10,
            base_seed: 0,
            hash_seed: 0,
        }
    }
}

impl ProfileSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProfile(msg));
        if self.precisions.is_empty() || self.widths.is_empty() {
            return bad("at least one precision and one hash width are required".into());
        }
        for &p in &self.precisions {
            SketchConfig::new(p, HashWidth::H64, 0)?;
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.checkpoints.is_empty() {
            return bad("no checkpoints".into());
        }
        if self.checkpoints[0] == 0 {
            return bad("checkpoints must be positive".into());
        }
        if let Some(w) = self.checkpoints.windows(2).find(|w| w[0] >= w[1]) {
            return bad(format!(
                "checkpoints must be strictly increasing ({} then {})",
                w[0], w[1]
            ));
        }
        let last = *self.checkpoints.last().unwrap();
        if last > DOMAIN {
            return Err(Error::DomainExhausted(last));
        }
        Ok(())
    }

    /// Stream seed of trial `trial`; independent of `(p, H)` so every
    /// configuration sees the same data.
    pub fn trial_seed(&self, trial: u32) -> u64 {
        splitmix64(self.base_seed ^ splitmix64(trial as u64))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorCurvePoint {
    pub p: u8,
    pub hash_bits: u32,
    pub n: u64,
    pub trial: u32,
    pub estimate: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub p: u8,
    pub hash_bits: u32,
    pub n: u64,
    pub err_min: f64,
    pub err_median: f64,
    pub err_max: f64,
    pub err_rms: f64,
    pub theoretical: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileResult {
    /// Sorted by `(p, hash_bits, n, trial)`.
    pub points: Vec<ErrorCurvePoint>,
    /// Sorted by `(p, hash_bits, n)`.
    pub summary: Vec<SummaryRow>,
}

/// Estimates of one growing sketch at each checkpoint.
fn run_trial(config: SketchConfig, checkpoints: &[u64], seed: u64) -> Result<Vec<f64>> {
    let last = *checkpoints.last().expect("validated non-empty");
    let mut stream = synth_stream(last, seed)?;
    let mut sketch = HllSketch::new(config);
    let mut seen = 0u64;
    let mut out = Vec::with_capacity(checkpoints.len());
    for &n in checkpoints {
        sketch.extend_words(stream.by_ref().take((n - seen) as usize));
        seen = n;
        out.push(estimate(&sketch).estimate);
    }
    Ok(out)
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

fn summarize(points: &[ErrorCurvePoint]) -> Result<Vec<SummaryRow>> {
    let mut rows = Vec::new();
    for group in points.chunk_by(|a, b| (a.p, a.hash_bits, a.n) == (b.p, b.hash_bits, b.n)) {
        let mut errs: Vec<f64> = group.iter().map(|pt| pt.relative_error).collect();
        errs.sort_by(f64::total_cmp);
        let rms = (errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt();
        let head = &group[0];
        rows.push(SummaryRow {
            p: head.p,
            hash_bits: head.hash_bits,
            n: head.n,
            err_min: errs[0],
            err_median: median(&errs),
            err_max: *errs.last().unwrap(),
            err_rms: rms,
            theoretical: theoretical_error(head.p)?,
        });
    }
    Ok(rows)
}

/// Runs every `(p, H, trial)` combination of `spec`, in parallel across
/// trials, and returns per-trial points plus per-checkpoint summaries.
pub fn run_profile(spec: &ProfileSpec) -> Result<ProfileResult> {
    spec.validate()?;
    let mut jobs = Vec::new();
    for &p in &spec.precisions {
        for &width in &spec.widths {
            let config = SketchConfig::new(p, width, spec.hash_seed)?;
            for trial in 0..spec.trials {
                jobs.push((config, trial));
            }
        }
    }

    let per_job: Vec<Vec<ErrorCurvePoint>> = jobs
        .par_iter()
        .map(|&(config, trial)| {
            let estimates = run_trial(config, &spec.checkpoints, spec.trial_seed(trial))?;
            Ok(spec
                .checkpoints
                .iter()
                .zip(estimates)
                .map(|(&n, est)| ErrorCurvePoint {
                    p: config.precision(),
                    hash_bits: config.hash_bits(),
                    n,
                    trial,
                    estimate: est,
                    relative_error: (est - n as f64).abs() / n as f64,
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut points: Vec<ErrorCurvePoint> = per_job.into_iter().flatten().collect();
    points.sort_by_key(|pt| (pt.p, pt.hash_bits, pt.n, pt.trial));
    let summary = summarize(&points)?;
    Ok(ProfileResult { points, summary })
}

/// `p,hash_bits,n,trial,estimate,relative_error`
pub fn write_points_csv<W: Write>(out: W, points: &[ErrorCurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for pt in points {
        w.serialize(pt)?;
    }
    w.flush()?;
    Ok(())
}

/// `p,hash_bits,n,err_min,err_median,err_max,err_rms,theoretical`
pub fn write_summary_csv<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
