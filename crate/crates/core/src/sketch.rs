//! HyperLogLog register state and the aggregation phase.

use crate::error::{Error, Result};
use crate::hash::{hash_bytes, hash_word, HashValue, HashWidth};

pub const MIN_PRECISION: u8 = 4;
pub const MAX_PRECISION: u8 = 16;

/// Magic prefix of the binary sketch encoding.
pub const SKETCH_MAGIC: [u8; 4] = *b"HLLS";
pub const SKETCH_VERSION: u8 = 1;
/// Header length of the binary sketch encoding: magic, version, p, H, seed.
pub const SKETCH_HEADER_LEN: usize = 4 + 1 + 1 + 1 + 4;

/// Precision, hash width and hash seed of a sketch.
///
/// The bucket count `m = 2^p` and the maximum rank `H - p + 1` are derived on
/// demand rather than stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SketchConfig {
    precision: u8,
    width: HashWidth,
    seed: u32,
}

impl SketchConfig {
    pub fn new(precision: u8, width: HashWidth, seed: u32) -> Result<Self> {
        if !(MIN_PRECISION..=MAX_PRECISION).contains(&precision) {
            return Err(Error::PrecisionOutOfRange(precision));
        }
        Ok(SketchConfig {
            precision,
            width,
            seed,
        })
    }

    /// Builds a configuration from raw numeric fields, as found on the wire.
    pub fn from_raw(precision: u8, hash_bits: u32, seed: u32) -> Result<Self> {
        let width = HashWidth::from_bits(hash_bits)?;
        Self::new(precision, width, seed)
    }

    #[inline]
    pub fn precision(&self) -> u8 {
        self.precision
    }

    #[inline]
    pub fn width(&self) -> HashWidth {
        self.width
    }

    #[inline]
    pub fn hash_bits(&self) -> u32 {
        self.width.bits()
    }

    #[inline]
    pub fn seed(&self) -> u32 {
        self.seed
    }

    #[inline]
    pub fn buckets(&self) -> usize {
        1 << self.precision
    }

    /// Bits left in the hash after the index is removed (`H - p`).
    #[inline]
    pub fn remainder_bits(&self) -> u32 {
        self.hash_bits() - self.precision as u32
    }

    /// Largest observable rank, `H - p + 1`.
    #[inline]
    pub fn max_rank(&self) -> u8 {
        (self.remainder_bits() + 1) as u8
    }

    pub fn with_seed(self, seed: u32) -> Self {
        SketchConfig { seed, ..self }
    }

    fn check_compatible(&self, other: &SketchConfig) -> Result<()> {
        if self.precision != other.precision {
            return Err(Error::ConfigMismatch {
                field: "precision",
                left: self.precision as u64,
                right: other.precision as u64,
            });
        }
        if self.width != other.width {
            return Err(Error::ConfigMismatch {
                field: "hash_bits",
                left: self.hash_bits() as u64,
                right: other.hash_bits() as u64,
            });
        }
        if self.seed != other.seed {
            return Err(Error::ConfigMismatch {
                field: "seed",
                left: self.seed as u64,
                right: other.seed as u64,
            });
        }
        Ok(())
    }
}

/// Splits a hash into its bucket index (top `p` bits) and the `H - p` bit
/// remainder `w`.
#[inline]
pub fn split_hash(hash: HashValue, precision: u8) -> (usize, u64) {
    let remainder_bits = hash.width().bits() - precision as u32;
    let bits = hash.bits();
    let index = (bits >> remainder_bits) as usize;
    let w = bits & ((1u64 << remainder_bits) - 1);
    (index, w)
}

/// Leading zeros of `w` within a `remainder_bits`-wide field, plus one.
///
/// `w == 0` yields the maximum rank `remainder_bits + 1`.
#[inline]
pub fn rank(w: u64, remainder_bits: u32) -> u8 {
    debug_assert!(remainder_bits < 64 && w < 1u64 << remainder_bits);
    if w == 0 {
        (remainder_bits + 1) as u8
    } else {
        (w.leading_zeros() - (64 - remainder_bits) + 1) as u8
    }
}

/// Semantic memory footprint in bits: `2^p * ceil(log2(H - p + 1))`.
pub fn footprint_bits(precision: u8, width: HashWidth) -> Result<u64> {
    let config = SketchConfig::new(precision, width, 0)?;
    let states = config.max_rank() as u64;
    // ceil(log2(states)) for states >= 2
    let register_bits = 64 - (states - 1).leading_zeros() as u64;
    Ok((config.buckets() as u64) * register_bits)
}

/// A HyperLogLog sketch: `m` registers holding the maximum rank observed per
/// bucket.
///
/// Registers are stored one byte each; the semantic register width reported by
/// [`footprint_bits`] is 5 or 6 bits.
///
/// A sketch has a single writer. Parallel aggregation shards the input over
/// several sketches and merges them afterwards (see [`crate::pipeline`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HllSketch {
    config: SketchConfig,
    registers: Vec<u8>,
}

impl HllSketch {
    pub fn new(config: SketchConfig) -> Self {
        HllSketch {
            config,
            registers: vec![0; config.buckets()],
        }
    }

    /// Builds a sketch from an explicit register array.
    pub fn from_registers(config: SketchConfig, registers: Vec<u8>) -> Result<Self> {
        if registers.len() != config.buckets() {
            return Err(Error::Decode(format!(
                "expected {} registers, found {}",
                config.buckets(),
                registers.len()
            )));
        }
        let max_rank = config.max_rank();
        if let Some((i, &r)) = registers.iter().enumerate().find(|(_, &r)| r > max_rank) {
            return Err(Error::Decode(format!(
                "register {i} holds {r}, above the maximum rank {max_rank}"
            )));
        }
        Ok(HllSketch { config, registers })
    }

    #[inline]
    pub fn config(&self) -> &SketchConfig {
        &self.config
    }

    #[inline]
    pub fn registers(&self) -> &[u8] {
        &self.registers
    }

    pub fn is_empty(&self) -> bool {
        self.registers.iter().all(|&r| r == 0)
    }

    /// Applies one hash value: `M[i] = max(M[i], rank(w))`.
    #[inline]
    pub fn update_hash(&mut self, hash: HashValue) {
        debug_assert_eq!(hash.width(), self.config.width);
        let (index, w) = split_hash(hash, self.config.precision);
        let r = rank(w, self.config.remainder_bits());
        let slot = &mut self.registers[index];
        if r > *slot {
            *slot = r;
        }
    }

    /// Inserts an arbitrary byte item.
    #[inline]
    pub fn update(&mut self, item: &[u8]) {
        let h = hash_bytes(item, self.config.width, self.config.seed);
        self.update_hash(h);
    }

    /// Inserts a 32-bit word, hashed as its little-endian bytes.
    #[inline]
    pub fn update_word(&mut self, word: u32) {
        let h = hash_word(word, self.config.width, self.config.seed);
        self.update_hash(h);
    }

    pub fn extend_words<I: IntoIterator<Item = u32>>(&mut self, words: I) {
        for w in words {
            self.update_word(w);
        }
    }

    /// Bucket-wise maximum of two sketches with identical configuration.
    pub fn merge(&self, other: &HllSketch) -> Result<HllSketch> {
        let mut out = self.clone();
        out.merge_from(other)?;
        Ok(out)
    }

    /// In-place form of [`HllSketch::merge`].
    pub fn merge_from(&mut self, other: &HllSketch) -> Result<()> {
        self.config.check_compatible(&other.config)?;
        for (a, &b) in self.registers.iter_mut().zip(&other.registers) {
            *a = (*a).max(b);
        }
        Ok(())
    }

    /// Serializes to `"HLLS" | version | p | H | seed (u32 LE) | registers`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(SKETCH_HEADER_LEN + self.registers.len());
        out.extend_from_slice(&SKETCH_MAGIC);
        out.push(SKETCH_VERSION);
        out.push(self.config.precision);
        out.push(self.config.hash_bits() as u8);
        out.extend_from_slice(&self.config.seed.to_le_bytes());
        out.extend_from_slice(&self.registers);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<HllSketch> {
        if bytes.len() < SKETCH_HEADER_LEN {
            return Err(Error::Decode(format!(
                "need {SKETCH_HEADER_LEN} header bytes, found {}",
                bytes.len()
            )));
        }
        if bytes[0..4] != SKETCH_MAGIC {
            return Err(Error::Decode("bad magic".into()));
        }
        if bytes[4] != SKETCH_VERSION {
            return Err(Error::Decode(format!("unsupported version {}", bytes[4])));
        }
        let seed = u32::from_le_bytes(bytes[7..11].try_into().unwrap());
        let config = SketchConfig::from_raw(bytes[5], bytes[6] as u32, seed)?;
        HllSketch::from_registers(config, bytes[SKETCH_HEADER_LEN..].to_vec())
    }
}
