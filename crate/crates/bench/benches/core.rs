use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use knnsp::oracle::ContinuumOracle;
use knnsp::shortest_path::{sp_all_from, sp_distance};
use knnsp::{DensityModel, Domain, GeometricGraph, SpatialIndex, TwoSquares, WeightScheme};
use knnsp_bench::{knn_graph, two_squares_sample, uniform_sample};

fn spatial(c: &mut Criterion) {
    let mut group = c.benchmark_group("kd_tree");
    for n in [10_000, 100_000] {
        let pts = uniform_sample(n, 2, 1);
        group.bench_with_input(BenchmarkId::new("build", n), &pts, |b, pts| {
            b.iter(|| SpatialIndex::build(black_box(pts)).unwrap())
        });
        let idx = SpatialIndex::build(&pts).unwrap();
        group.throughput(Throughput::Elements(1000));
        group.bench_with_input(BenchmarkId::new("knn_31_x1000", n), &idx, |b, idx| {
            b.iter(|| {
                for i in 0..1000 {
                    black_box(idx.knn_of(i, 31).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn graphs(c: &mut Criterion) {
    let mut group = c.benchmark_group("graph_build");
    group.sample_size(20);
    let pts = uniform_sample(20_000, 2, 2);
    group.bench_function("knn_k31_unit_20k", |b| {
        b.iter(|| GeometricGraph::build_knn(&pts, 31, &WeightScheme::Unit).unwrap())
    });
    let sqrt = WeightScheme::parse("h-power:0.5").unwrap();
    group.bench_function("knn_k31_sqrt_20k", |b| b.iter(|| GeometricGraph::build_knn(&pts, 31, &sqrt).unwrap()));
    group.bench_function("eps_auto_euclidean_20k", |b| {
        b.iter(|| GeometricGraph::build_eps(&pts, 0.035, &WeightScheme::Euclidean).unwrap())
    });
    group.finish();
}

fn shortest_paths(c: &mut Criterion) {
    let mut group = c.benchmark_group("shortest_path");
    let pts = two_squares_sample(30_000, 3);
    let unit = knn_graph(&pts, 33, &WeightScheme::Unit);
    let weighted = knn_graph(&pts, 33, &WeightScheme::Euclidean);
    group.bench_function("bfs_single_pair_30k", |b| b.iter(|| sp_distance(&unit, 0, 29_999).unwrap()));
    group.bench_function("dijkstra_single_pair_30k", |b| b.iter(|| sp_distance(&weighted, 0, 29_999).unwrap()));
    group.bench_function("dijkstra_full_tree_30k", |b| b.iter(|| sp_all_from(&weighted, 0).unwrap()));
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    let model = DensityModel::two_squares(&TwoSquares::default()).unwrap();
    group.bench_function("build_q_m512", |b| b.iter(|| ContinuumOracle::for_q(&model, 512).unwrap()));
    let o = ContinuumOracle::build(Domain::unit(2), 512, |_| 1.0).unwrap();
    group.bench_function("query_m512", |b| {
        b.iter(|| o.f_distance(black_box(&[0.1, 0.2]), black_box(&[0.9, 0.7])).unwrap())
    });
    group.finish();
}

criterion_group!(benches, spatial, graphs, shortest_paths, oracle);
criterion_main!(benches);
