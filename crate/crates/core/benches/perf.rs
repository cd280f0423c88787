use cantor_forge_core::{exec, Construction, Interval, Scalar};
use criterion::{criterion_group, criterion_main, Criterion};

fn cover_words(depth: u32) -> Vec<u64> {
    (0..(1u64 << depth)).collect()
}

fn bench_cover_map(c: &mut Criterion) {
    let construction = Construction::middle_thirds(Interval::unit());
    let words = cover_words(14);
    let mut group = c.benchmark_group("cover_depth14");
    group.bench_function("dispatch", |b| {
        b.iter(|| {
            let parts = exec::map_collect(words.clone(), |bits| {
                let w = word_of(bits, 14);
                construction.interval(&w).unwrap()
            });
            std::hint::black_box(parts.len())
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let parts = exec::map_collect_seq(words.clone(), |bits| {
                let w = word_of(bits, 14);
                construction.interval(&w).unwrap()
            });
            std::hint::black_box(parts.len())
        })
    });
    group.finish();
}

fn word_of(bits: u64, len: u32) -> cantor_forge_core::BinaryWord {
    let mut w = cantor_forge_core::BinaryWord::empty();
    for i in (0..len).rev() {
        w = w.push(((bits >> i) & 1) as u8);
    }
    w
}

fn bench_minkowski(c: &mut Criterion) {
    let thirds = Construction::middle_thirds(Interval::unit());
    let a = thirds.cover(10).unwrap();
    let shift = Interval::make(Scalar::ratio(1, 7), Scalar::ratio(2, 7));
    c.bench_function("minkowski_cover10_interval", |b| {
        b.iter(|| {
            let mut out = Vec::new();
            a.minkowski_interval_into(&shift, &mut out);
            std::hint::black_box(out.len())
        })
    });
}

criterion_group!(benches, bench_cover_map, bench_minkowski);
criterion_main!(benches);
