//! Parallel vs sequential throughput on the data-parallel hot paths:
//! pmf table construction, Stirling triangle building, and Monte Carlo
//! sampling shards.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use frackell::poisson::{pmf_table_par, pmf_table_seq, PmfParams};
use frackell::precision::MuParam;
use frackell::sampler::{sample_counts_par, sample_counts_seq};
use frackell::stirling::{build_triangle_par, build_triangle_seq};

fn bench_pmf_table(c: &mut Criterion) {
    let mut group = c.benchmark_group("pmf_table");
    group.sample_size(10);
    for (mu, x) in [(1.0f64, 1.0f64), (0.5, 1.0), (0.5, 5.0)] {
        let params = PmfParams::new(MuParam::new(mu).unwrap(), x, 1.0).unwrap();
        group.bench_with_input(
            BenchmarkId::new("seq", format!("mu{mu}_x{x}")),
            &params,
            |b, p| b.iter(|| pmf_table_seq(black_box(p), 60, 40).unwrap()),
        );
        group.bench_with_input(
            BenchmarkId::new("par", format!("mu{mu}_x{x}")),
            &params,
            |b, p| b.iter(|| pmf_table_par(black_box(p), 60, 40).unwrap()),
        );
    }
    group.finish();
}

fn bench_triangle(c: &mut Criterion) {
    let mut group = c.benchmark_group("stirling_triangle");
    group.sample_size(10);
    for m_max in [60u32, 120] {
        group.bench_with_input(BenchmarkId::new("seq", m_max), &m_max, |b, &m| {
            b.iter(|| build_triangle_seq(black_box(m)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("par", m_max), &m_max, |b, &m| {
            b.iter(|| build_triangle_par(black_box(m)).unwrap())
        });
    }
    group.finish();
}

fn bench_sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sampling");
    group.sample_size(10);
    let params = PmfParams::new(MuParam::new(0.5).unwrap(), 1.0, 1.0).unwrap();
    for count in [100_000usize, 1_000_000] {
        group.bench_with_input(BenchmarkId::new("seq", count), &count, |b, &n| {
            b.iter(|| sample_counts_seq(black_box(&params), n, 42, 60, 30).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("par", count), &count, |b, &n| {
            b.iter(|| sample_counts_par(black_box(&params), n, 42, 60, 30).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_pmf_table, bench_triangle, bench_sampling);
criterion_main!(benches);
