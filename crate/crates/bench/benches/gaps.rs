use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use ordgap::dist::make_builtin;
use ordgap::gaps::{r_direct, r_stieltjes};
use ordgap::mc::mc_gap;
use ordgap::monotone::check_all;
use ordgap::{GapSequence, QuadratureConfig};

const DISTS: &[&str] = &["exp:lambda=1", "weibull:shape=2", "gompertz:b=1,c=0.5"];

fn quadrature(c: &mut Criterion) {
    let cfg = QuadratureConfig::default();
    let mut g = c.benchmark_group("quadrature");
    for spec in DISTS {
        let d = make_builtin(spec).unwrap();
        for n in [2u64, 50, 1000] {
            g.bench_with_input(
                BenchmarkId::new(format!("direct/{spec}"), n),
                &n,
                |b, &n| b.iter(|| r_direct(&d, black_box(n), &cfg).unwrap()),
            );
            g.bench_with_input(
                BenchmarkId::new(format!("stieltjes/{spec}"), n),
                &n,
                |b, &n| b.iter(|| r_stieltjes(&d, black_box(n), &cfg).unwrap()),
            );
        }
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let d = make_builtin("weibull:shape=2").unwrap();
    let mut g = c.benchmark_group("mc");
    g.sample_size(10);
    for n in [2u64, 10] {
        g.bench_with_input(BenchmarkId::new("extreme_gap_100k", n), &n, |b, &n| {
            b.iter(|| mc_gap(&d, black_box(n), n - 1, 100_000, 1, 1).unwrap())
        });
    }
    g.finish();
}

fn checks(c: &mut Criterion) {
    let cfg = QuadratureConfig::default();
    let d = make_builtin("weibull:shape=2").unwrap();
    let vals: Vec<_> = (2..=200).map(|n| r_direct(&d, n, &cfg).unwrap()).collect();
    let seq = GapSequence::from_values(&vals).unwrap();
    c.bench_function("check_all/199x8", |b| {
        b.iter(|| check_all(black_box(&seq), 8))
    });
}

criterion_group!(benches, quadrature, monte_carlo, checks);
criterion_main!(benches);
