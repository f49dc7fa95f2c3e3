//! Front end for `hll-core`: the `hll` command-line tool and a TCP ingest
//! service that aggregates framed word streams and replies with an estimate.

pub mod commands;
pub mod error;
pub mod frame;
pub mod service;

pub use commands::{count, count_path, InputFormat};
pub use error::{exit, CliError};
pub use frame::{encode_frame, FrameError, FrameHeader};
pub use service::{send_frame, Server, ServerHandle, ServiceConfig};
