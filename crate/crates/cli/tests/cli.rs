use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hll_core::{synth_stream, HashWidth, HllSketch, PipelineEngine, SketchConfig};
use serde_json::Value;

fn hll(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hll"))
        .args(args)
        .output()
        .expect("spawn hll")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("one JSON line")
}

fn write_words(path: &Path, words: &[u32]) {
    let bytes: Vec<u8> = words.iter().flat_map(|w| w.to_le_bytes()).collect();
    fs::write(path, bytes).unwrap();
}

#[test]
fn count_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.bin");
    fs::write(&path, b"").unwrap();
    let v = json(&hll(&["count", path.to_str().unwrap()]));
    assert_eq!(v["estimate"], 0.0);
    assert_eq!(v["p"], 16);
    assert_eq!(v["hash_bits"], 64);
}

#[test]
fn count_matches_library_registers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("words.bin");
    let words: Vec<u32> = synth_stream(100_000, 31).unwrap().collect();
    write_words(&path, &words);

    let v = json(&hll(&["count", "-k", "4", path.to_str().unwrap()]));
    let est = v["estimate"].as_f64().unwrap();
    assert!((est - 1e5).abs() / 1e5 <= 0.02, "{est}");

    let config = SketchConfig::new(16, HashWidth::H64, 0).unwrap();
    let mut sketch = HllSketch::new(config);
    sketch.extend_words(words.iter().copied());
    let lib = hll_core::estimate(&sketch);
    assert_eq!(est, lib.estimate);
    assert_eq!(v["raw_estimate"].as_f64().unwrap(), lib.raw_estimate);
    assert_eq!(
        v["empty_buckets"].as_u64().unwrap() as usize,
        lib.empty_buckets
    );

    let mut engine = PipelineEngine::new(config, 4).unwrap();
    engine.feed(&words);
    assert_eq!(engine.merged(), sketch);
}

#[test]
fn lines_with_duplicates_match_deduplicated() {
    let dir = tempfile::tempdir().unwrap();
    let dup = dir.path().join("dup.txt");
    let uniq = dir.path().join("uniq.txt");
    let mut dup_text = String::new();
    let mut uniq_text = String::new();
    for i in 0..5000 {
        let line = format!("https://example.com/item/{i}\n");
        uniq_text.push_str(&line);
        dup_text.push_str(&line);
        if i % 3 == 0 {
            dup_text.push_str(&format!("https://example.com/item/{}\n", i / 2));
        }
    }
    fs::write(&dup, dup_text).unwrap();
    fs::write(&uniq, uniq_text).unwrap();
    let a = json(&hll(&[
        "count",
        "--format",
        "lines",
        "-p",
        "12",
        dup.to_str().unwrap(),
    ]));
    let b = json(&hll(&[
        "count",
        "--format",
        "lines",
        "-p",
        "12",
        uniq.to_str().unwrap(),
    ]));
    assert_eq!(a, b);
}

#[test]
fn count_flags_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.bin");
    write_words(&path, &[1, 2, 3]);
    let p = path.to_str().unwrap();

    let v = json(&hll(&[
        "count",
        "--precision",
        "10",
        "--hash-bits",
        "32",
        "--seed",
        "9",
        p,
    ]));
    assert_eq!(
        (v["p"].as_u64(), v["hash_bits"].as_u64(), v["seed"].as_u64()),
        (Some(10), Some(32), Some(9))
    );

    assert_eq!(hll(&["count", "-p", "3", p]).status.code(), Some(2));
    assert_eq!(
        hll(&["count", "--hash-bits", "16", p]).status.code(),
        Some(2)
    );
    assert_eq!(hll(&["count", "-k", "0", p]).status.code(), Some(2));
    assert_eq!(hll(&["frobnicate"]).status.code(), Some(2));

    let missing = dir.path().join("missing.bin");
    assert_eq!(
        hll(&["count", missing.to_str().unwrap()]).status.code(),
        Some(3)
    );

    let ragged = dir.path().join("ragged.bin");
    fs::write(&ragged, [0u8; 10]).unwrap();
    let out = hll(&["count", ragged.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("byte offset 8"));
}

#[test]
fn profile_default_flags_shape() {
    // default grid is long-running; check the flags it resolves to instead
    let out = hll(&["profile", "--help"]);
    let help = String::from_utf8_lossy(&out.stdout);
    assert!(help.contains("1e3..1e8"));
    assert!(help.contains("[default: 10]"));
}

#[test]
fn profile_grid_restriction_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = hll(&[
            "profile",
            "--p",
            "14",
            "--hash",
            "32",
            "--points",
            "1e4..1e6",
            "--per-decade",
            "1",
            "--trials",
            "3",
            "--seed",
            "5",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        (
            fs::read_to_string(out_dir.join("points.csv")).unwrap(),
            fs::read_to_string(out_dir.join("summary.csv")).unwrap(),
        )
    };
    let (points, summary) = run("a");
    assert_eq!(run("b"), (points.clone(), summary.clone()));

    let mut lines = points.lines();
    assert_eq!(
        lines.next(),
        Some("p,hash_bits,n,trial,estimate,relative_error")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3 * 3);
    for row in &rows {
        assert_eq!((row[0], row[1]), ("14", "32"));
        assert!(["10000", "100000", "1000000"].contains(&row[2]));
    }
    assert_eq!(summary.lines().count(), 1 + 3);
}

#[test]
fn profile_summary_to_stdout() {
    let out = hll(&[
        "profile",
        "-p",
        "8",
        "--hash-bits",
        "64",
        "--points",
        "1000",
        "--trials",
        "2",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("p,hash_bits,n,err_min,err_median,err_max,err_rms,theoretical")
    );
    assert!(lines.next().unwrap().starts_with("8,64,1000,"));
}

#[test]
fn bench_rejects_small_volume() {
    let out = hll(&["bench", "--volume-mib", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("below the minimum"));
}

#[test]
fn bench_rows_per_repetition() {
    let out = hll(&["bench", "-k", "1,2", "--repetitions", "3", "-p", "10"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("k,run_id,words,seconds,words_per_second,bytes_per_second")
    );
    let ks: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ks, ["1", "1", "1", "2", "2", "2"]);
}
