use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use hll_bench::words;
use hll_core::{estimate, hash_word, HashWidth, HllSketch, SketchConfig};

fn hashing(c: &mut Criterion) {
    let data = words(1 << 16);
    let mut group = c.benchmark_group("hash_word");
    group.throughput(Throughput::Elements(data.len() as u64));
    for width in [HashWidth::H32, HashWidth::H64] {
        group.bench_with_input(BenchmarkId::from_parameter(width), &width, |b, &w| {
            b.iter(|| {
                data.iter()
                    .fold(0u64, |acc, &x| acc ^ hash_word(x, w, 0).bits())
            })
        });
    }
    group.finish();
}

fn update(c: &mut Criterion) {
    let data = words(1 << 20);
    let mut group = c.benchmark_group("update_word");
    group.throughput(Throughput::Bytes(4 * data.len() as u64));
    for (p, width) in [
        (14, HashWidth::H32),
        (14, HashWidth::H64),
        (16, HashWidth::H32),
        (16, HashWidth::H64),
    ] {
        let config = SketchConfig::new(p, width, 0).unwrap();
        group.bench_function(BenchmarkId::new(format!("p{p}"), width), |b| {
            b.iter(|| {
                let mut sketch = HllSketch::new(config);
                sketch.extend_words(data.iter().copied());
                black_box(sketch)
            })
        });
    }
    group.finish();
}

fn estimation(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimate");
    for p in [14u8, 16] {
        let config = SketchConfig::new(p, HashWidth::H64, 0).unwrap();
        let mut sketch = HllSketch::new(config);
        sketch.extend_words(words(1_000_000));
        group.bench_with_input(BenchmarkId::from_parameter(p), &sketch, |b, s| {
            b.iter(|| estimate(black_box(s)))
        });
    }
    group.finish();
}

fn merging(c: &mut Criterion) {
    let config = SketchConfig::new(16, HashWidth::H64, 0).unwrap();
    let data = words(200_000);
    let (left, right) = data.split_at(100_000);
    let mut a = HllSketch::new(config);
    a.extend_words(left.iter().copied());
    let mut b = HllSketch::new(config);
    b.extend_words(right.iter().copied());
    c.bench_function("merge/p16", |bench| {
        bench.iter(|| a.merge(black_box(&b)).unwrap())
    });
}

criterion_group!(benches, hashing, update, estimation, merging);
criterion_main!(benches);
