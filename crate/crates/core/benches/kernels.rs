use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use circlelab::analytic::SmoothWeight;
use circlelab::arith::SieveTables;
use circlelab::expsums::{complete_sum, exact_mean, s_alpha, Alpha, CompleteSumSpec, WindowedBox};
use circlelab::harness::{truth_count, TruthMode};
use circlelab::local::sigma_p;
use circlelab::singular_locus::fp_singular_count;
use circlelab::{par, Form};

fn ternary() -> Form {
    "1 2 0 0\n1 0 2 0\n-2 0 0 2".parse().unwrap()
}

fn split4() -> Form {
    "1 1 1 0 0\n-1 0 0 1 1".parse().unwrap()
}

/// Each kernel runs on a one-worker pool and on the full pool. Build with
/// `--no-default-features` to time the purely sequential code path.
fn threads() -> Vec<(&'static str, usize)> {
    if par::is_parallel() {
        vec![("1-thread", 1), ("pool", 0)]
    } else {
        vec![("sequential", 1)]
    }
}

fn bench_s_alpha(c: &mut Criterion) {
    let f = split4();
    let b = WindowedBox::new(300.0, vec![0.5; 4], SmoothWeight::bump(0.1, 2).unwrap()).unwrap();
    let t = SieveTables::build(400).unwrap();
    let alpha = Alpha::rational(3, 17).unwrap();
    let mut g = c.benchmark_group("s_alpha");
    for (name, n) in threads() {
        g.bench_function(BenchmarkId::new(name, "split4/N=300"), |bch| {
            bch.iter(|| par::with_threads(n, || s_alpha(black_box(&f), &b, &t, alpha).unwrap()))
        });
    }
    g.finish();
}

fn bench_exact_mean(c: &mut Criterion) {
    let f = ternary();
    let b = WindowedBox::new(120.0, vec![0.5; 3], SmoothWeight::bump(0.2, 2).unwrap()).unwrap();
    let t = SieveTables::build(200).unwrap();
    let mut g = c.benchmark_group("exact_mean");
    g.sample_size(10);
    for (name, n) in threads() {
        g.bench_function(BenchmarkId::new(name, "ternary/N=120"), |bch| {
            bch.iter(|| par::with_threads(n, || exact_mean(black_box(&f), &b, &t).unwrap()))
        });
    }
    g.finish();
}

fn bench_truth(c: &mut Criterion) {
    let f: Form = "1 2 1 0\n-1 0 2 1\n1 1 0 2\n-30 0 0 0".parse().unwrap();
    let t = SieveTables::build(600).unwrap();
    let mut g = c.benchmark_group("truth_count");
    g.sample_size(10);
    for (name, n) in threads() {
        g.bench_function(BenchmarkId::new(name, "brute/X=600"), |bch| {
            bch.iter(|| par::with_threads(n, || truth_count(black_box(&f), 600, &t, TruthMode::Primes).unwrap()))
        });
    }
    g.finish();
}

fn bench_local(c: &mut Criterion) {
    let f: Form = "1 2 0 0\n2 1 1 0\n-3 0 1 1\n-1 0 0 2".parse().unwrap();
    let cubic: Form = "1 3 0 0 0\n1 0 3 0 0\n-1 0 0 3 0\n-1 0 0 0 3".parse().unwrap();
    let mut g = c.benchmark_group("local");
    for (name, n) in threads() {
        g.bench_function(BenchmarkId::new(name, "sigma_p/p=13,k=2"), |bch| {
            bch.iter(|| par::with_threads(n, || sigma_p(black_box(&f), 13, 2).unwrap()))
        });
        g.bench_function(BenchmarkId::new(name, "complete_sum/q=175"), |bch| {
            bch.iter(|| par::with_threads(n, || complete_sum(black_box(&cubic), &CompleteSumSpec::new(175, 3).unwrap()).unwrap()))
        });
        g.bench_function(BenchmarkId::new(name, "fp_singular_count/p=101"), |bch| {
            bch.iter(|| par::with_threads(n, || fp_singular_count(black_box(&cubic), 101).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, bench_s_alpha, bench_exact_mean, bench_truth, bench_local);
criterion_main!(benches);
