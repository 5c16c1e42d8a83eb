//! Shared inputs for the benchmarks.

use knnsp::{DensityModel, Domain, GeometricGraph, SampleSet, TwoSquares, WeightScheme};

pub fn uniform_sample(n: usize, d: usize, seed: u64) -> SampleSet {
    DensityModel::uniform(Domain::unit(d)).sample(n, seed).expect("uniform sampling succeeds")
}

pub fn two_squares_sample(n: usize, seed: u64) -> SampleSet {
    DensityModel::two_squares(&TwoSquares::default())
        .and_then(|m| m.sample(n, seed))
        .expect("two-squares sampling succeeds")
}

pub fn knn_graph(points: &SampleSet, k: usize, scheme: &WeightScheme) -> GeometricGraph {
    GeometricGraph::build_knn(points, k, scheme).expect("graph builds")
}
