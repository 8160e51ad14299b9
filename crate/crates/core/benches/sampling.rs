use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use polysample::bench::{stream_count, Family};
use polysample::sampler::{draw_streams, Dbsop};
use polysample::triangulation::{decompose, triangulate_with};
use polysample::vertex::{default_facet_incidence, enumerate_vertices_with, DEFAULT_EPS};
use polysample::{Execution, VertexMethod};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn vertex_enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("vertices");
    group.sample_size(10);
    for (family, n, method) in [
        (Family::Hypercube, 6, VertexMethod::BasisEnumeration),
        (Family::Crosspolytope, 6, VertexMethod::DoubleDescription),
    ] {
        let p = family.polytope(n).unwrap();
        for (mode, exec) in MODES {
            group.bench_with_input(
                BenchmarkId::new(format!("{family}{n}"), mode),
                &exec,
                |b, &exec| {
                    b.iter(|| {
                        enumerate_vertices_with(black_box(&p), DEFAULT_EPS, method, exec).unwrap()
                    })
                },
            );
        }
    }
    group.finish();
}

fn triangulation(c: &mut Criterion) {
    let mut group = c.benchmark_group("triangulate");
    group.sample_size(10);
    for (family, n) in [(Family::Hypercube, 6), (Family::Crosspolytope, 6)] {
        let p = family.polytope(n).unwrap();
        let v = enumerate_vertices_with(&p, DEFAULT_EPS, VertexMethod::Auto, Execution::Parallel)
            .unwrap();
        let inc = default_facet_incidence(&p, &v);
        for (mode, exec) in MODES {
            group.bench_with_input(
                BenchmarkId::new(format!("{family}{n}"), mode),
                &exec,
                |b, &exec| b.iter(|| triangulate_with(black_box(&p), &v, &inc, exec).unwrap()),
            );
        }
    }
    group.finish();
}

fn dbsop_sampling(c: &mut Criterion) {
    const N: usize = 200_000;
    let mut group = c.benchmark_group("dbsop");
    group.sample_size(10);
    for (family, n) in [(Family::Hypercube, 4), (Family::Crosspolytope, 5)] {
        let p = family.polytope(n).unwrap();
        let (_, d) = decompose(&p, Execution::Parallel).unwrap();
        let sampler = Dbsop::new(&d).unwrap();
        for (mode, exec) in MODES {
            group.bench_with_input(
                BenchmarkId::new(format!("{family}{n}"), mode),
                &exec,
                |b, &exec| {
                    b.iter(|| {
                        draw_streams(&sampler, N, black_box(1), stream_count(N), exec).unwrap()
                    })
                },
            );
        }
    }
    group.finish();
}

criterion_group!(benches, vertex_enumeration, triangulation, dbsop_sampling);
criterion_main!(benches);
