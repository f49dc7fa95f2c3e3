use std::io;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const PROTOCOL: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },

    /// Malformed input data or wire frame.
    #[error("{0}")]
    Protocol(String),

    #[error(transparent)]
    Core(#[from] hll_core::Error),
}

impl CliError {
    pub fn io(context: impl Into<String>, source: io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use hll_core::Error as E;
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Io { .. } => exit::IO,
            CliError::Protocol(_) => exit::PROTOCOL,
            CliError::Core(E::Output(_)) => exit::IO,
            CliError::Core(E::Decode(_)) => exit::PROTOCOL,
            CliError::Core(_) => exit::USAGE,
        }
    }
}
