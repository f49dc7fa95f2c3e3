//! Murmur3 hashing at 32- and 64-bit output widths.
//!
//! `murmur3_32` is MurmurHash3_x86_32. `murmur3_64` is the first (low) 64-bit
//! word `h1` of MurmurHash3_x64_128. Both are bit-exact with the SMHasher
//! reference implementation and consume blocks in little-endian order.

use std::fmt;

use crate::error::{Error, Result};

/// Output width of the hash function, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HashWidth {
    H32,
    H64,
}

impl HashWidth {
    pub const fn bits(self) -> u32 {
        match self {
            HashWidth::H32 => 32,
            HashWidth::H64 => 64,
        }
    }

    pub fn from_bits(bits: u32) -> Result<Self> {
        match bits {
            32 => Ok(HashWidth::H32),
            64 => Ok(HashWidth::H64),
            other => Err(Error::UnsupportedHashWidth(other)),
        }
    }
}

impl fmt::Display for HashWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bits())
    }
}

/// A hash value together with the width it was produced at.
///
/// For `H32` the upper 32 bits of `bits` are always zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HashValue {
    bits: u64,
    width: HashWidth,
}

impl HashValue {
    pub const fn from_u32(bits: u32) -> Self {
        HashValue {
            bits: bits as u64,
            width: HashWidth::H32,
        }
    }

    pub const fn from_u64(bits: u64) -> Self {
        HashValue {
            bits,
            width: HashWidth::H64,
        }
    }

    #[inline]
    pub const fn bits(self) -> u64 {
        self.bits
    }

    #[inline]
    pub const fn width(self) -> HashWidth {
        self.width
    }
}

const C1_32: u32 = 0xcc9e_2d51;
const C2_32: u32 = 0x1b87_3593;

#[inline(always)]
fn fmix32(mut h: u32) -> u32 {
    h ^= h >> 16;
    h = h.wrapping_mul(0x85eb_ca6b);
    h ^= h >> 13;
    h = h.wrapping_mul(0xc2b2_ae35);
    h ^= h >> 16;
    h
}

#[inline(always)]
fn fmix64(mut k: u64) -> u64 {
    k ^= k >> 33;
    k = k.wrapping_mul(0xff51_afd7_ed55_8ccd);
    k ^= k >> 33;
    k = k.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    k ^= k >> 33;
    k
}

#[inline(always)]
fn mix_k1_32(mut k: u32) -> u32 {
    k = k.wrapping_mul(C1_32);
    k = k.rotate_left(15);
    k.wrapping_mul(C2_32)
}

/// MurmurHash3_x86_32.
pub fn murmur3_32_raw(data: &[u8], seed: u32) -> u32 {
    let mut h1 = seed;
    let mut blocks = data.chunks_exact(4);
    for block in &mut blocks {
        let k1 = u32::from_le_bytes([block[0], block[1], block[2], block[3]]);
        h1 ^= mix_k1_32(k1);
        h1 = h1.rotate_left(13);
        h1 = h1.wrapping_mul(5).wrapping_add(0xe654_6b64);
    }

    let tail = blocks.remainder();
    if !tail.is_empty() {
        let mut k1 = 0u32;
        for (i, &b) in tail.iter().enumerate() {
            k1 |= (b as u32) << (8 * i);
        }
        h1 ^= mix_k1_32(k1);
    }

    h1 ^= data.len() as u32;
    fmix32(h1)
}

/// MurmurHash3_x86_32 of a single word serialized little-endian.
#[inline]
pub fn murmur3_32_word(word: u32, seed: u32) -> u32 {
    let mut h1 = seed ^ mix_k1_32(word);
    h1 = h1.rotate_left(13);
    h1 = h1.wrapping_mul(5).wrapping_add(0xe654_6b64);
    h1 ^= 4;
    fmix32(h1)
}

const C1_64: u64 = 0x87c3_7b91_1142_53d5;
const C2_64: u64 = 0x4cf5_ad43_2745_937f;

/// MurmurHash3_x64_128, returned as `(h1, h2)`.
///
/// The canonical byte output is `h1` then `h2`, each little-endian.
pub fn murmur3_x64_128(data: &[u8], seed: u32) -> (u64, u64) {
    let mut h1 = seed as u64;
    let mut h2 = seed as u64;

    let mut blocks = data.chunks_exact(16);
    for block in &mut blocks {
        let mut k1 = u64::from_le_bytes(block[0..8].try_into().unwrap());
        let mut k2 = u64::from_le_bytes(block[8..16].try_into().unwrap());

        k1 = k1.wrapping_mul(C1_64);
        k1 = k1.rotate_left(31);
        k1 = k1.wrapping_mul(C2_64);
        h1 ^= k1;

        h1 = h1.rotate_left(27);
        h1 = h1.wrapping_add(h2);
        h1 = h1.wrapping_mul(5).wrapping_add(0x52dc_e729);

        k2 = k2.wrapping_mul(C2_64);
        k2 = k2.rotate_left(33);
        k2 = k2.wrapping_mul(C1_64);
        h2 ^= k2;

        h2 = h2.rotate_left(31);
        h2 = h2.wrapping_add(h1);
        h2 = h2.wrapping_mul(5).wrapping_add(0x3849_5ab5);
    }

    let tail = blocks.remainder();
    let mut k1 = 0u64;
    let mut k2 = 0u64;
    for (i, &b) in tail.iter().enumerate() {
        if i < 8 {
            k1 |= (b as u64) << (8 * i);
        } else {
            k2 |= (b as u64) << (8 * (i - 8));
        }
    }
    if tail.len() > 8 {
        k2 = k2.wrapping_mul(C2_64);
        k2 = k2.rotate_left(33);
        k2 = k2.wrapping_mul(C1_64);
        h2 ^= k2;
    }
    if !tail.is_empty() {
        k1 = k1.wrapping_mul(C1_64);
        k1 = k1.rotate_left(31);
        k1 = k1.wrapping_mul(C2_64);
        h1 ^= k1;
    }

    let len = data.len() as u64;
    h1 ^= len;
    h2 ^= len;

    h1 = h1.wrapping_add(h2);
    h2 = h2.wrapping_add(h1);

    h1 = fmix64(h1);
    h2 = fmix64(h2);

    h1 = h1.wrapping_add(h2);
    h2 = h2.wrapping_add(h1);

    (h1, h2)
}

/// MurmurHash3_x64_128 specialised to one 4-byte little-endian word.
#[inline]
pub fn murmur3_64_word(word: u32, seed: u32) -> u64 {
    let mut h1 = seed as u64;
    let mut h2 = seed as u64;

    let mut k1 = word as u64;
    k1 = k1.wrapping_mul(C1_64);
    k1 = k1.rotate_left(31);
    k1 = k1.wrapping_mul(C2_64);
    h1 ^= k1;

    h1 ^= 4;
    h2 ^= 4;
    h1 = h1.wrapping_add(h2);
    h2 = h2.wrapping_add(h1);
    h1 = fmix64(h1);
    h2 = fmix64(h2);
    h1.wrapping_add(h2)
}

/// 32-bit Murmur3 hash of `data`.
pub fn murmur3_32(data: &[u8], seed: u32) -> HashValue {
    HashValue::from_u32(murmur3_32_raw(data, seed))
}

/// 64-bit Murmur3 hash of `data`: the `h1` word of MurmurHash3_x64_128.
pub fn murmur3_64(data: &[u8], seed: u32) -> HashValue {
    HashValue::from_u64(murmur3_x64_128(data, seed).0)
}

/// Hashes an arbitrary byte item at the requested width.
#[inline]
pub fn hash_bytes(data: &[u8], width: HashWidth, seed: u32) -> HashValue {
    match width {
        HashWidth::H32 => murmur3_32(data, seed),
        HashWidth::H64 => murmur3_64(data, seed),
    }
}

/// Hashes a 32-bit word as its 4-byte little-endian serialization.
///
/// Equal to `hash_bytes(&word.to_le_bytes(), width, seed)`.
#[inline]
pub fn hash_word(word: u32, width: HashWidth, seed: u32) -> HashValue {
    match width {
        HashWidth::H32 => HashValue::from_u32(murmur3_32_word(word, seed)),
        HashWidth::H64 => HashValue::from_u64(murmur3_64_word(word, seed)),
    }
}
