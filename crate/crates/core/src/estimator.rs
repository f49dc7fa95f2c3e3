//! Computation phase: empty-register census, exact harmonic sum, bias
//! constant and the correction ladder.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hash::HashWidth;
use crate::sketch::{HllSketch, SketchConfig};

const TWO_POW_32: f64 = 4_294_967_296.0;

/// Raw estimates above this value trigger the 32-bit large-range correction.
pub const LARGE_RANGE_THRESHOLD: f64 = TWO_POW_32 / 30.0;

/// Which branch of the correction ladder produced the final estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Correction {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "small_range_linear_counting")]
    SmallRangeLinearCounting,
    #[serde(rename = "large_range_32")]
    LargeRange32,
}

impl Correction {
    pub fn as_str(self) -> &'static str {
        match self {
            Correction::None => "none",
            Correction::SmallRangeLinearCounting => "small_range_linear_counting",
            Correction::LargeRange32 => "large_range_32",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateReport {
    pub raw_estimate: f64,
    pub estimate: f64,
    pub correction: Correction,
    pub empty_buckets: usize,
    pub config: SketchConfig,
}

#[derive(Serialize)]
struct ReportJson {
    estimate: f64,
    raw_estimate: f64,
    correction: Correction,
    empty_buckets: usize,
    p: u8,
    hash_bits: u32,
    seed: u32,
}

impl EstimateReport {
    /// Single-line JSON object, without a trailing newline.
    pub fn to_json(&self) -> String {
        let row = ReportJson {
            estimate: self.estimate,
            raw_estimate: self.raw_estimate,
            correction: self.correction,
            empty_buckets: self.empty_buckets,
            p: self.config.precision(),
            hash_bits: self.config.hash_bits(),
            seed: self.config.seed(),
        };
        serde_json::to_string(&row).expect("report fields are always serializable")
    }
}

/// Bias-correction constant for `m` buckets.
pub fn alpha(m: usize) -> Result<f64> {
    if !m.is_power_of_two() || !(16..=65536).contains(&m) {
        return Err(Error::InvalidBucketCount(m));
    }
    Ok(match m {
        16 => 0.673,
        32 => 0.697,
        64 => 0.709,
        _ => 0.7213 / (1.0 + 1.079 / m as f64),
    })
}

/// Exact fixed-point accumulator for `sum_j 2^(-M[j])`.
///
/// The value is `numerator / 2^fraction_bits` with `fraction_bits = H - p + 1`,
/// so each addend `2^(-r)` is the one-hot integer `2^(fraction_bits - r)` and
/// the sum never rounds. The largest possible sum, `m`, needs
/// `p + fraction_bits + 1 <= 66` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactHarmonicSum {
    numerator: u128,
    fraction_bits: u32,
}

impl ExactHarmonicSum {
    pub fn new(config: &SketchConfig) -> Self {
        ExactHarmonicSum {
            numerator: 0,
            fraction_bits: config.max_rank() as u32,
        }
    }

    #[inline]
    pub fn add_rank(&mut self, rank: u8) {
        debug_assert!(rank as u32 <= self.fraction_bits);
        self.numerator += 1u128 << (self.fraction_bits - rank as u32);
    }

    pub fn numerator(&self) -> u128 {
        self.numerator
    }

    pub fn fraction_bits(&self) -> u32 {
        self.fraction_bits
    }

    /// Nearest `f64` to the exact sum.
    pub fn to_f64(&self) -> f64 {
        // u128 -> f64 rounds to nearest; scaling by a power of two is exact.
        self.numerator as f64 / (self.fraction_bits as f64).exp2()
    }
}

/// Number of zero registers.
pub fn zero_census(sketch: &HllSketch) -> usize {
    sketch.registers().iter().filter(|&&r| r == 0).count()
}

/// Exact `sum_j 2^(-M[j])` over all registers.
pub fn harmonic_sum(sketch: &HllSketch) -> ExactHarmonicSum {
    let mut acc = ExactHarmonicSum::new(sketch.config());
    for &r in sketch.registers() {
        acc.add_rank(r);
    }
    acc
}

/// Zero census and harmonic sum in one pass over the registers.
fn census_and_sum(sketch: &HllSketch) -> (usize, ExactHarmonicSum) {
    let mut acc = ExactHarmonicSum::new(sketch.config());
    let mut zeros = 0;
    for &r in sketch.registers() {
        zeros += (r == 0) as usize;
        acc.add_rank(r);
    }
    (zeros, acc)
}

fn raw_from_sum(config: &SketchConfig, sum: &ExactHarmonicSum) -> f64 {
    let m = config.buckets() as f64;
    let a = alpha(config.buckets()).expect("config precision is validated");
    a * m * m / sum.to_f64()
}

/// Raw harmonic-mean estimate `alpha_m * m^2 / sum_j 2^(-M[j])`.
pub fn raw_estimate(sketch: &HllSketch) -> f64 {
    raw_from_sum(sketch.config(), &harmonic_sum(sketch))
}

/// LinearCounting estimate `m * ln(m / V)`.
pub fn linear_counting(m: usize, empty: usize) -> Result<f64> {
    if empty == 0 || empty > m {
        return Err(Error::EmptyBucketCount { empty, buckets: m });
    }
    Ok(m as f64 * (m as f64 / empty as f64).ln())
}

/// 32-bit large-range correction `-2^32 * ln(1 - E / 2^32)`.
///
/// Raw estimates at or beyond `2^32` are clamped to `2^32 - 1` first, which
/// keeps the result finite.
pub fn large_range_correction(raw: f64) -> f64 {
    let ratio = (raw / TWO_POW_32).min(1.0 - 1.0 / TWO_POW_32);
    -TWO_POW_32 * (-ratio).ln_1p()
}

/// Runs the full correction ladder on `sketch`.
pub fn estimate(sketch: &HllSketch) -> EstimateReport {
    let config = *sketch.config();
    let m = config.buckets();
    let (empty, sum) = census_and_sum(sketch);
    let raw = raw_from_sum(&config, &sum);

    let (value, correction) = if raw <= 2.5 * m as f64 && empty != 0 {
        let lc = linear_counting(m, empty).expect("guarded by empty != 0");
        (lc, Correction::SmallRangeLinearCounting)
    } else if config.width() == HashWidth::H32 && raw > LARGE_RANGE_THRESHOLD {
        (large_range_correction(raw), Correction::LargeRange32)
    } else {
        (raw, Correction::None)
    };

    EstimateReport {
        raw_estimate: raw,
        estimate: value,
        correction,
        empty_buckets: empty,
        config,
    }
}
