use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use hll_core::profiler::{log_grid, write_points_csv, write_summary_csv};
use hll_core::{
    bench, run_profile, write_bench_csv, EstimateReport, PipelineEngine, ProfileResult,
    ProfileSpec, SketchConfig,
};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// Packed 4-byte little-endian words.
    U32Le,
    /// One item per line, hashed without its line terminator.
    Lines,
}

const WORDS_PER_BATCH: usize = 1 << 16;
const LINES_PER_BATCH: usize = 1 << 14;

/// Aggregates `input` through a `pipelines`-way engine.
pub fn count<R: Read>(
    input: R,
    format: InputFormat,
    config: SketchConfig,
    pipelines: usize,
) -> Result<EstimateReport, CliError> {
    let mut engine = PipelineEngine::new(config, pipelines)?;
    match format {
        InputFormat::U32Le => feed_words(input, &mut engine)?,
        InputFormat::Lines => feed_lines(input, &mut engine)?,
    }
    Ok(engine.finalize())
}

pub fn count_path(
    path: &Path,
    format: InputFormat,
    config: SketchConfig,
    pipelines: usize,
) -> Result<EstimateReport, CliError> {
    if path == Path::new("-") {
        return count(io::stdin().lock(), format, config, pipelines);
    }
    let file = File::open(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    count(file, format, config, pipelines)
}

fn feed_words<R: Read>(mut input: R, engine: &mut PipelineEngine) -> Result<(), CliError> {
    let mut buf = vec![0u8; WORDS_PER_BATCH * 4];
    let mut words = Vec::with_capacity(WORDS_PER_BATCH);
    let mut carry = 0usize;
    let mut offset = 0u64;
    loop {
        let n = match input.read(&mut buf[carry..]) {
            Ok(0) => break,
            Ok(n) => n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(CliError::io("reading input", e)),
        };
        let filled = carry + n;
        let whole = filled / 4 * 4;
        words.clear();
        words.extend(
            buf[..whole]
                .chunks_exact(4)
                .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]])),
        );
        engine.feed(&words);
        offset += whole as u64;
        buf.copy_within(whole..filled, 0);
        carry = filled - whole;
    }
    if carry != 0 {
        return Err(CliError::Protocol(format!(
            "u32le input length is not a multiple of 4: {carry} trailing byte(s) at byte offset {offset}"
        )));
    }
    Ok(())
}

fn feed_lines<R: Read>(input: R, engine: &mut PipelineEngine) -> Result<(), CliError> {
    let mut reader = BufReader::with_capacity(1 << 16, input);
    let mut batch: Vec<Vec<u8>> = Vec::with_capacity(LINES_PER_BATCH);
    loop {
        let mut line = Vec::new();
        let n = reader
            .read_until(b'\n', &mut line)
            .map_err(|e| CliError::io("reading input", e))?;
        if n == 0 {
            break;
        }
        if line.last() == Some(&b'\n') {
            line.pop();
            if line.last() == Some(&b'\r') {
                line.pop();
            }
        }
        batch.push(line);
        if batch.len() == LINES_PER_BATCH {
            engine.feed_items(&batch);
            batch.clear();
        }
    }
    engine.feed_items(&batch);
    Ok(())
}

/// Parses a cardinality such as `10000`, `1e4` or `2.5e6`.
pub fn parse_count(text: &str) -> Result<u64, CliError> {
    let bad = || CliError::Usage(format!("invalid cardinality {text:?}"));
    if let Ok(n) = text.parse::<u64>() {
        return Ok(n);
    }
    let v: f64 = text.parse().map_err(|_| bad())?;
    if !(v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64) {
        return Err(bad());
    }
    Ok(v as u64)
}

/// `LO..HI` (log-spaced, `per_decade` points per factor of ten) or a
/// comma-separated list.
pub fn parse_points(text: &str, per_decade: u32) -> Result<Vec<u64>, CliError> {
    if let Some((lo, hi)) = text.split_once("..") {
        let (lo, hi) = (parse_count(lo.trim())?, parse_count(hi.trim())?);
        if lo == 0 || hi < lo || per_decade == 0 {
            return Err(CliError::Usage(format!("invalid range {text:?}")));
        }
        return Ok(log_grid(lo, hi, per_decade));
    }
    text.split(',').map(|t| parse_count(t.trim())).collect()
}

/// Runs the profile; writes `points.csv` and `summary.csv` under `out`, or
/// the summary alone to `stdout` when `out` is `None`.
pub fn profile<W: Write>(
    spec: &ProfileSpec,
    out: Option<&Path>,
    stdout: W,
) -> Result<ProfileResult, CliError> {
    let result = run_profile(spec)?;
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display().to_string(), e))?;
            let create = |name: &str| -> Result<BufWriter<File>, CliError> {
                let path: PathBuf = dir.join(name);
                File::create(&path)
                    .map(BufWriter::new)
                    .map_err(|e| CliError::io(path.display().to_string(), e))
            };
            write_points_csv(create("points.csv")?, &result.points)?;
            write_summary_csv(create("summary.csv")?, &result.summary)?;
        }
        None => write_summary_csv(stdout, &result.summary)?,
    }
    Ok(result)
}

/// Default pipeline counts for `bench`: powers of two up to the core count,
/// plus the core count itself.
pub fn default_bench_pipelines() -> Vec<usize> {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut ks: Vec<usize> = std::iter::successors(Some(1usize), |k| Some(k * 2))
        .take_while(|&k| k < cores)
        .collect();
    ks.push(cores);
    ks
}

pub fn run_bench<W: Write>(
    config: SketchConfig,
    pipelines: &[usize],
    volume_bytes: u64,
    repetitions: usize,
    out: W,
) -> Result<(), CliError> {
    let rows = bench(config, pipelines, volume_bytes, repetitions)?;
    write_bench_csv(out, &rows)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use hll_core::HashWidth;

    fn config() -> SketchConfig {
        SketchConfig::new(12, HashWidth::H64, 0).unwrap()
    }

    #[test]
    fn counts() {
        assert_eq!(parse_count("1e4").unwrap(), 10_000);
        assert_eq!(parse_count("2.5e6").unwrap(), 2_500_000);
        assert_eq!(parse_count("123").unwrap(), 123);
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
        assert!(parse_count("abc").is_err());
    }

    #[test]
    fn points() {
        assert_eq!(
            parse_points("1e4..1e6", 1).unwrap(),
            vec![10_000, 100_000, 1_000_000]
        );
        assert_eq!(parse_points("1e3, 5e3", 4).unwrap(), vec![1000, 5000]);
        assert!(parse_points("1e6..1e4", 4).is_err());
        assert!(parse_points("0..10", 4).is_err());
    }

    #[test]
    fn empty_input_counts_zero() {
        for fmt in [InputFormat::U32Le, InputFormat::Lines] {
            let r = count(io::empty(), fmt, config(), 4).unwrap();
            assert_eq!(r.estimate, 0.0);
        }
    }

    #[test]
    fn ragged_u32le_names_offset() {
        let data = vec![0u8; 4 * 70_000 + 3];
        let err = count(data.as_slice(), InputFormat::U32Le, config(), 1).unwrap_err();
        assert_eq!(err.exit_code(), crate::error::exit::PROTOCOL);
        assert!(err.to_string().contains("byte offset 280000"), "{err}");
    }

    #[test]
    fn line_terminators_are_stripped() {
        let unix = count(&b"a\nb\nc\n"[..], InputFormat::Lines, config(), 1).unwrap();
        let dos = count(&b"a\r\nb\r\nc"[..], InputFormat::Lines, config(), 1).unwrap();
        assert_eq!(unix, dos);
        assert!((unix.estimate - 3.0).abs() < 0.01);
    }

    #[test]
    fn bench_pipelines_end_at_core_count() {
        let ks = default_bench_pipelines();
        assert_eq!(ks[0], 1);
        assert!(ks.windows(2).all(|w| w[0] < w[1]));
    }
}
