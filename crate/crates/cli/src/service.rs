//! TCP ingest service: one frame per connection, one JSON reply line, close.

use std::io::{self, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};

use hll_core::{EstimateReport, PipelineEngine, SketchConfig};

use crate::frame::{FrameError, FrameHeader, FRAME_HEADER_LEN, FRAME_TRAILER};

/// Default cap on `word_count` per frame.
pub const DEFAULT_MAX_WORDS: u64 = 1 << 32;

// Payload words read per pipeline feed.
const READ_BATCH_WORDS: usize = 1 << 16;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Fallback for frame headers that leave `p` or `hash_bits` at zero.
    pub defaults: SketchConfig,
    pub pipelines: usize,
    pub max_words: u64,
}

#[derive(Debug, Default)]
pub struct Metrics {
    pub connections: AtomicU64,
    pub frames_ok: AtomicU64,
    pub frames_rejected: AtomicU64,
    pub words: AtomicU64,
}

#[derive(Debug)]
pub enum ServeError {
    Frame(FrameError),
    Io(io::Error),
}

impl From<FrameError> for ServeError {
    fn from(e: FrameError) -> Self {
        ServeError::Frame(e)
    }
}

impl std::fmt::Display for ServeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ServeError::Frame(e) => e.fmt(f),
            ServeError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

/// Reads into `buf` until it is full or the peer stops sending; returns the
/// number of bytes read.
fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// Reads one frame from `input` and aggregates its payload.
///
/// Nothing is produced until the trailer has been read and verified.
pub fn process_frame<R: Read>(
    input: &mut R,
    config: &ServiceConfig,
    metrics: &Metrics,
) -> Result<EstimateReport, ServeError> {
    let mut header = [0u8; FRAME_HEADER_LEN];
    let got = read_full(input, &mut header).map_err(ServeError::Io)?;
    if got < FRAME_HEADER_LEN {
        return Err(FrameError::Truncated {
            expected: FRAME_HEADER_LEN as u64,
            received: got as u64,
        }
        .into());
    }
    let header = FrameHeader::decode(&header)?;
    if header.word_count > config.max_words {
        return Err(FrameError::TooManyWords {
            declared: header.word_count,
            cap: config.max_words,
        }
        .into());
    }
    let sketch_config = header.resolve(&config.defaults)?;
    let mut engine = PipelineEngine::new(sketch_config, config.pipelines.max(1))
        .expect("pipeline count is at least 1");

    let payload_bytes = header.word_count * 4;
    let mut remaining = header.word_count;
    let mut bytes = vec![0u8; READ_BATCH_WORDS.min(remaining as usize) * 4];
    let mut words = Vec::with_capacity(bytes.len() / 4);
    while remaining > 0 {
        let batch = (remaining as usize).min(READ_BATCH_WORDS);
        let buf = &mut bytes[..batch * 4];
        let got = read_full(input, buf).map_err(ServeError::Io)?;
        if got < buf.len() {
            let received = FRAME_HEADER_LEN as u64 + (payload_bytes - remaining * 4) + got as u64;
            return Err(FrameError::Truncated {
                expected: FRAME_HEADER_LEN as u64 + payload_bytes + 4,
                received,
            }
            .into());
        }
        words.clear();
        words.extend(
            buf.chunks_exact(4)
                .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]])),
        );
        engine.feed(&words);
        remaining -= batch as u64;
    }

    let mut trailer = [0u8; 4];
    let got = read_full(input, &mut trailer).map_err(ServeError::Io)?;
    if got < 4 {
        return Err(FrameError::Truncated {
            expected: FRAME_HEADER_LEN as u64 + payload_bytes + 4,
            received: FRAME_HEADER_LEN as u64 + payload_bytes + got as u64,
        }
        .into());
    }
    if trailer != FRAME_TRAILER {
        return Err(FrameError::BadTrailer(trailer).into());
    }
    metrics
        .words
        .fetch_add(header.word_count, Ordering::Relaxed);
    Ok(engine.finalize())
}

/// Serves one connection: reply with the JSON report or `ERR <reason>`.
pub fn handle_connection(stream: TcpStream, config: &ServiceConfig, metrics: &Metrics) {
    metrics.connections.fetch_add(1, Ordering::Relaxed);
    let mut reader = BufReader::with_capacity(1 << 16, &stream);
    let reply = match process_frame(&mut reader, config, metrics) {
        Ok(report) => {
            metrics.frames_ok.fetch_add(1, Ordering::Relaxed);
            format!("{}\n", report.to_json())
        }
        Err(e) => {
            metrics.frames_rejected.fetch_add(1, Ordering::Relaxed);
            format!("ERR {e}\n")
        }
    };
    let mut writer = &stream;
    // the peer may already be gone; nothing useful to do about it
    let _ = writer
        .write_all(reply.as_bytes())
        .and_then(|_| writer.flush());
    let _ = stream.shutdown(std::net::Shutdown::Both);
}

/// A bound listener.
pub struct Server {
    listener: TcpListener,
    config: Arc<ServiceConfig>,
    metrics: Arc<Metrics>,
}

impl Server {
    pub fn bind<A: ToSocketAddrs>(addr: A, config: ServiceConfig) -> io::Result<Self> {
        Ok(Server {
            listener: TcpListener::bind(addr)?,
            config: Arc::new(config),
            metrics: Arc::new(Metrics::default()),
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    pub fn metrics(&self) -> Arc<Metrics> {
        Arc::clone(&self.metrics)
    }

    /// Accepts connections forever, one thread per connection.
    pub fn run(self) -> io::Result<()> {
        self.run_until(&AtomicBool::new(false))
    }

    fn run_until(&self, stop: &AtomicBool) -> io::Result<()> {
        for conn in self.listener.incoming() {
            if stop.load(Ordering::Acquire) {
                break;
            }
            let stream = match conn {
                Ok(s) => s,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(e) => {
                    eprintln!("accept failed: {e}");
                    continue;
                }
            };
            let config = Arc::clone(&self.config);
            let metrics = Arc::clone(&self.metrics);
            thread::spawn(move || handle_connection(stream, &config, &metrics));
        }
        Ok(())
    }

    /// Runs the accept loop on a background thread.
    pub fn spawn(self) -> io::Result<ServerHandle> {
        let addr = self.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let metrics = self.metrics();
        let flag = Arc::clone(&stop);
        let thread = thread::spawn(move || self.run_until(&flag));
        Ok(ServerHandle {
            addr,
            stop,
            metrics,
            thread: Some(thread),
        })
    }
}

pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    metrics: Arc<Metrics>,
    thread: Option<JoinHandle<io::Result<()>>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    /// Stops accepting; connections already in flight finish on their own.
    pub fn shutdown(mut self) {
        self.stop_and_join();
    }

    fn stop_and_join(&mut self) {
        if let Some(thread) = self.thread.take() {
            self.stop.store(true, Ordering::Release);
            // wake the blocking accept
            let _ = TcpStream::connect(self.addr);
            let _ = thread.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.stop_and_join();
    }
}

/// Client side: sends one frame and returns the reply line without its
/// newline.
pub fn send_frame<A: ToSocketAddrs>(addr: A, frame: &[u8]) -> io::Result<String> {
    let mut stream = TcpStream::connect(addr)?;
    stream.write_all(frame)?;
    stream.shutdown(std::net::Shutdown::Write)?;
    let mut reply = String::new();
    stream.read_to_string(&mut reply)?;
    Ok(reply.trim_end_matches('\n').to_string())
}
