//! Shortest paths on random geometric graphs and the density-based
//! distances they converge to.
//!
//! The crate samples points from analytic densities, builds kNN and
//! epsilon graphs with several edge-weight schemes, computes exact
//! shortest paths, and compares them with a lattice approximation of the
//! continuum f-distance. [`theory`] evaluates the explicit constants of the
//! limit theorems and [`experiments`] wires everything into seeded runs.

pub mod density;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod oracle;
pub mod rng;
pub mod shortest_path;
pub mod spatial;
pub mod theory;
pub mod weights;

pub use density::{Component, DensityKind, DensityModel, Domain, GaussianBump, SampleSet, TwoSquares};
pub use error::{Error, Result};
pub use graph::{Edge, GeometricGraph, GraphMeta, GraphMode};
pub use oracle::{ContinuumOracle, Geodesic};
pub use shortest_path::{DistanceMatrix, PathResult};
pub use spatial::{Neighbor, SpatialIndex};
pub use theory::TheoremConstants;
pub use weights::{ScalarFn, WeightScheme};
