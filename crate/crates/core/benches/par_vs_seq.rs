//! Parallel versus single-threaded runs of the sample-heavy kernels.
//! Build with `--no-default-features` to time the sequential code path on
//! both sides.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lowdeg::ldlr::chi2_sym_gaussian;
use lowdeg::models::{NullSpec, PlantedKind, PlantedSpec, Spec};
use lowdeg::par::with_threads;
use lowdeg::subgraph::{null_moments, GraphPattern};

const MODES: [(&str, Option<usize>); 2] = [("parallel", None), ("sequential", Some(1))];

fn subgraph_moments(c: &mut Criterion) {
    let patterns = [GraphPattern::edge(), GraphPattern::two_path(), GraphPattern::triangle()];
    let mut g = c.benchmark_group("null_moments_n60");
    g.sample_size(10);
    for (label, threads) in MODES {
        g.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| with_threads(threads, || null_moments(60, &patterns, 4, 2000, 1).unwrap()))
        });
    }
    g.finish();
}

fn gaussian_advantage(c: &mut Criterion) {
    let spec = Spec::Planted(PlantedSpec::new(PlantedKind::SpikedMean { lambda: 1.0 }, NullSpec::GaussVector { n: 200 }).unwrap());
    let mut g = c.benchmark_group("chi2_sym_gaussian_d4");
    g.sample_size(10);
    for (label, threads) in MODES {
        g.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| with_threads(threads, || chi2_sym_gaussian(&spec, 4, 4000, 1).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, subgraph_moments, gaussian_advantage);
criterion_main!(benches);
