use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Error {
    #[error("precision {0} is out of range: p must lie in [{min}, {max}]", min = crate::MIN_PRECISION, max = crate::MAX_PRECISION)]
    PrecisionOutOfRange(u8),

    #[error("hash width {0} is not supported: expected 32 or 64")]
    UnsupportedHashWidth(u32),

    #[error("bucket count {0} is not a power of two with exponent in [4, 16]")]
    InvalidBucketCount(usize),

    #[error("sketch configurations differ in {field}: {left} vs {right}")]
    ConfigMismatch {
        field: &'static str,
        left: u64,
        right: u64,
    },

    #[error("linear counting requires 1 <= V <= m, got V = {empty} with m = {buckets}")]
    EmptyBucketCount { empty: usize, buckets: usize },

    #[error("pipeline count must be at least 1")]
    NoPipelines,

    #[error("benchmark volume {volume} bytes is below the minimum of {minimum} bytes")]
    VolumeBelowMinimum { volume: u64, minimum: u64 },

    #[error("cardinality {0} exceeds the 32-bit domain")]
    DomainExhausted(u64),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("malformed sketch encoding: {0}")]
    Decode(String),

    #[error("failed to write report: {0}")]
    Output(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Output(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Output(e.to_string())
    }
}
