use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use atb_bench::{image_source, sharp, sharp_tree};
use atb_core::encoding::{decode, encode};
use atb_core::experiments::{sharp_transition_d0, table_config};
use atb_core::tree::{cart_prune, greedy_grow, uniform_baseline};
use atb_core::wavelet::decompose;
use atb_core::{RefineConfig, RefineRule, StopRule};

fn greedy(c: &mut Criterion) {
    let mut g = c.benchmark_group("greedy_grow");
    g.sample_size(10);
    let (f, d0) = sharp(0.1);
    let acfg = table_config();
    for (name, rule) in [
        ("modified", RefineRule::Modified(2.0 / 3.0)),
        ("newest", RefineRule::NewestVertex),
    ] {
        let rcfg = RefineConfig {
            rule,
            ..RefineConfig::default()
        };
        for n in [512, 2048] {
            g.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| greedy_grow(&f, &d0, &acfg, &rcfg, StopRule::MaxLeaves(n)).unwrap())
            });
        }
    }
    g.bench_function("uniform/2048", |b| {
        b.iter(|| uniform_baseline(&f, &d0, 2048, &acfg).unwrap())
    });
    let (img, d0) = image_source(256);
    g.bench_function("image256/1000", |b| {
        b.iter(|| {
            greedy_grow(
                &img,
                &d0,
                &acfg,
                &RefineConfig::default(),
                StopRule::MaxLeaves(1000),
            )
            .unwrap()
        })
    });
    g.finish();
}

fn tree_ops(c: &mut Criterion) {
    let (f, tree, acfg) = sharp_tree(0.1, 4096);
    c.bench_function("cart_prune/4096", |b| {
        b.iter(|| cart_prune(black_box(&tree), 1e-7, 2.0))
    });
    c.bench_function("cart_prune_inf/4096", |b| {
        b.iter(|| cart_prune(black_box(&tree), 1e-4, f64::INFINITY))
    });
    let bits = encode(&tree);
    c.bench_function("encode/4096", |b| b.iter(|| encode(black_box(&tree))));
    let d0 = sharp_transition_d0();
    c.bench_function("decode/4096", |b| {
        b.iter(|| decode(black_box(&bits), &d0).unwrap())
    });
    let mut g = c.benchmark_group("wavelet");
    g.sample_size(10);
    g.bench_function("decompose/4096", |b| {
        b.iter(|| decompose(&f, &tree, &acfg).unwrap())
    });
    g.finish();
}

criterion_group!(benches, greedy, tree_ops);
criterion_main!(benches);
