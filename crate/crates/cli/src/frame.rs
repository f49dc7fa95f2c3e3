//! Ingest frame layout, little-endian throughout:
//!
//! ```text
//! "HLL1" | p: u8 | hash_bits: u8 | seed: u32 | word_count: u64 | word_count x u32 | "HEND"
//! ```
//!
//! A `p` or `hash_bits` of zero selects the server's default for that field.

use hll_core::{HashWidth, SketchConfig};

pub const FRAME_MAGIC: [u8; 4] = *b"HLL1";
pub const FRAME_TRAILER: [u8; 4] = *b"HEND";
pub const FRAME_HEADER_LEN: usize = 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameHeader {
    pub precision: u8,
    pub hash_bits: u8,
    pub seed: u32,
    pub word_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrameError {
    BadMagic([u8; 4]),
    BadTrailer([u8; 4]),
    InvalidConfig(String),
    TooManyWords { declared: u64, cap: u64 },
    Truncated { expected: u64, received: u64 },
}

impl std::fmt::Display for FrameError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FrameError::BadMagic(m) => write!(f, "bad magic {:?}", String::from_utf8_lossy(m)),
            FrameError::BadTrailer(m) => {
                write!(f, "bad trailer {:?}", String::from_utf8_lossy(m))
            }
            FrameError::InvalidConfig(msg) => write!(f, "invalid config: {msg}"),
            FrameError::TooManyWords { declared, cap } => {
                write!(f, "word_count {declared} exceeds cap {cap}")
            }
            FrameError::Truncated { expected, received } => write!(
                f,
                "truncated frame: expected {expected} bytes, received {received}"
            ),
        }
    }
}

impl std::error::Error for FrameError {}

impl FrameHeader {
    pub fn new(config: &SketchConfig, word_count: u64) -> Self {
        FrameHeader {
            precision: config.precision(),
            hash_bits: config.hash_bits() as u8,
            seed: config.seed(),
            word_count,
        }
    }

    pub fn encode(&self) -> [u8; FRAME_HEADER_LEN] {
        let mut out = [0u8; FRAME_HEADER_LEN];
        out[0..4].copy_from_slice(&FRAME_MAGIC);
        out[4] = self.precision;
        out[5] = self.hash_bits;
        out[6..10].copy_from_slice(&self.seed.to_le_bytes());
        out[10..18].copy_from_slice(&self.word_count.to_le_bytes());
        out
    }

    pub fn decode(bytes: &[u8; FRAME_HEADER_LEN]) -> Result<Self, FrameError> {
        let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
        if magic != FRAME_MAGIC {
            return Err(FrameError::BadMagic(magic));
        }
        Ok(FrameHeader {
            precision: bytes[4],
            hash_bits: bytes[5],
            seed: u32::from_le_bytes(bytes[6..10].try_into().unwrap()),
            word_count: u64::from_le_bytes(bytes[10..18].try_into().unwrap()),
        })
    }

    /// Sketch configuration for this frame; zero fields fall back to
    /// `defaults`.
    pub fn resolve(&self, defaults: &SketchConfig) -> Result<SketchConfig, FrameError> {
        let p = match self.precision {
            0 => defaults.precision(),
            p => p,
        };
        let width = match self.hash_bits {
            0 => Ok(defaults.width()),
            bits => HashWidth::from_bits(bits as u32),
        };
        width
            .and_then(|w| SketchConfig::new(p, w, self.seed))
            .map_err(|e| FrameError::InvalidConfig(e.to_string()))
    }
}

/// A complete frame carrying `words`.
pub fn encode_frame(config: &SketchConfig, words: &[u32]) -> Vec<u8> {
    let header = FrameHeader::new(config, words.len() as u64);
    let mut out = Vec::with_capacity(FRAME_HEADER_LEN + 4 * words.len() + 4);
    out.extend_from_slice(&header.encode());
    for w in words {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out.extend_from_slice(&FRAME_TRAILER);
    out
}
