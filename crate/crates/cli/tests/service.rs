use std::io::{Read, Write};
use std::net::{Shutdown, TcpStream};
use std::sync::atomic::Ordering;
use std::thread;

use hll_cli::frame::FrameHeader;
use hll_cli::{encode_frame, send_frame, Server, ServiceConfig};
use hll_core::{synth_stream, HashWidth, HllSketch, SketchConfig};
use serde_json::Value;

fn start(max_words: u64) -> hll_cli::ServerHandle {
    let config = ServiceConfig {
        defaults: SketchConfig::new(16, HashWidth::H64, 0).unwrap(),
        pipelines: 4,
        max_words,
    };
    Server::bind("127.0.0.1:0", config)
        .unwrap()
        .spawn()
        .unwrap()
}

fn reply_json(reply: &str) -> Value {
    serde_json::from_str(reply).unwrap_or_else(|e| panic!("{reply:?}: {e}"))
}

#[test]
fn empty_frame() {
    let server = start(1 << 32);
    let config = SketchConfig::new(12, HashWidth::H32, 0).unwrap();
    let v = reply_json(&send_frame(server.addr(), &encode_frame(&config, &[])).unwrap());
    assert_eq!(v["estimate"], 0.0);
    assert_eq!(v["p"], 12);
    assert_eq!(v["hash_bits"], 32);
}

#[test]
fn reply_matches_library() {
    let server = start(1 << 32);
    let config = SketchConfig::new(14, HashWidth::H64, 77).unwrap();
    let words: Vec<u32> = synth_stream(50_000, 3).unwrap().collect();
    let v = reply_json(&send_frame(server.addr(), &encode_frame(&config, &words)).unwrap());
    let mut sketch = HllSketch::new(config);
    sketch.extend_words(words.iter().copied());
    let lib = hll_core::estimate(&sketch);
    assert_eq!(v, reply_json(&lib.to_json()));
    assert_eq!(server.metrics().frames_ok.load(Ordering::Relaxed), 1);
}

#[test]
fn concurrent_connections_are_isolated() {
    let server = start(1 << 32);
    let addr = server.addr();
    let handles: Vec<_> = [(10u8, 20_000u64), (16, 80_000), (12, 5_000)]
        .into_iter()
        .map(|(p, n)| {
            thread::spawn(move || {
                let config = SketchConfig::new(p, HashWidth::H64, 0).unwrap();
                let words: Vec<u32> = synth_stream(n, p as u64).unwrap().collect();
                let v = reply_json(&send_frame(addr, &encode_frame(&config, &words)).unwrap());
                let mut sketch = HllSketch::new(config);
                sketch.extend_words(words);
                (v, reply_json(&hll_core::estimate(&sketch).to_json()))
            })
        })
        .collect();
    for h in handles {
        let (got, expected) = h.join().unwrap();
        assert_eq!(got, expected);
    }
}

#[test]
fn bad_magic_gets_err_line() {
    let server = start(1 << 32);
    let mut frame = encode_frame(&SketchConfig::new(10, HashWidth::H64, 0).unwrap(), &[1, 2]);
    frame[0] = b'Z';
    let reply = send_frame(server.addr(), &frame).unwrap();
    assert!(reply.starts_with("ERR "), "{reply}");
    assert!(reply.contains("magic"));
}

#[test]
fn truncated_frame_gets_err_line() {
    let server = start(1 << 32);
    let frame = encode_frame(
        &SketchConfig::new(10, HashWidth::H64, 0).unwrap(),
        &[1, 2, 3],
    );
    let reply = send_frame(server.addr(), &frame[..frame.len() - 6]).unwrap();
    assert!(reply.starts_with("ERR truncated"), "{reply}");
}

#[test]
fn oversize_frame_rejected_without_payload() {
    let server = start(100);
    let config = SketchConfig::new(10, HashWidth::H64, 0).unwrap();
    let header = FrameHeader::new(&config, 1_000_000).encode();
    // send only the header and keep the write side open: the reply must
    // arrive without the server waiting for payload
    let mut stream = TcpStream::connect(server.addr()).unwrap();
    stream.write_all(&header).unwrap();
    let mut reply = String::new();
    stream.read_to_string(&mut reply).unwrap();
    assert!(
        reply.starts_with("ERR word_count 1000000 exceeds cap 100"),
        "{reply}"
    );
}

#[test]
fn no_reply_before_trailer() {
    let server = start(1 << 32);
    let config = SketchConfig::new(10, HashWidth::H64, 0).unwrap();
    let frame = encode_frame(&config, &[5, 6, 7]);
    let mut stream = TcpStream::connect(server.addr()).unwrap();
    stream.write_all(&frame[..frame.len() - 4]).unwrap();
    stream
        .set_read_timeout(Some(std::time::Duration::from_millis(200)))
        .unwrap();
    let mut buf = [0u8; 1];
    let early = stream.read(&mut buf);
    assert!(early.is_err(), "reply arrived before the trailer");
    stream.set_read_timeout(None).unwrap();
    stream.write_all(b"HEND").unwrap();
    stream.shutdown(Shutdown::Write).unwrap();
    let mut reply = String::new();
    stream.read_to_string(&mut reply).unwrap();
    let v = reply_json(reply.trim_end());
    assert!((v["estimate"].as_f64().unwrap() - 3.0).abs() < 0.01);
}

#[test]
fn malformed_frame_does_not_disturb_neighbour() {
    let server = start(1 << 32);
    let addr = server.addr();
    let config = SketchConfig::new(12, HashWidth::H64, 0).unwrap();
    let words: Vec<u32> = synth_stream(30_000, 8).unwrap().collect();
    let good = thread::spawn({
        let words = words.clone();
        move || send_frame(addr, &encode_frame(&config, &words)).unwrap()
    });
    let mut bad = encode_frame(&config, &words);
    let n = bad.len();
    bad[n - 2] = 0;
    assert!(send_frame(addr, &bad)
        .unwrap()
        .starts_with("ERR bad trailer"));
    let mut sketch = HllSketch::new(config);
    sketch.extend_words(words);
    assert_eq!(
        reply_json(&good.join().unwrap()),
        reply_json(&hll_core::estimate(&sketch).to_json())
    );
}
