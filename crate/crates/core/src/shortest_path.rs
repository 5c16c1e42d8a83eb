//! Shortest-path distances on geometric graphs.
//!
//! Unit-weight graphs use breadth-first search, everything else a binary-heap
//! Dijkstra. Both record, for every vertex, the smallest-id predecessor among
//! all optimal ones, so reconstructed paths are reproducible.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::GeometricGraph;

const NO_PRED: usize = usize::MAX;

/// Result of a single-pair query. Unreachable targets have
/// `reachable == false` and an infinite length.
#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub length: f64,
    pub path: Vec<usize>,
    pub reachable: bool,
}

impl PathResult {
    fn unreachable() -> Self {
        Self { length: f64::INFINITY, path: Vec::new(), reachable: false }
    }

    pub fn hops(&self) -> usize {
        self.path.len().saturating_sub(1)
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on (dist, vertex).
        other.dist.total_cmp(&self.dist).then(other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Distances and canonical predecessors from one source.
#[derive(Debug, Clone)]
pub struct SearchTree {
    pub source: usize,
    pub dist: Vec<f64>,
    pred: Vec<usize>,
}

impl SearchTree {
    pub fn path_to(&self, target: usize) -> Option<Vec<usize>> {
        if !self.dist[target].is_finite() {
            return None;
        }
        let mut path = vec![target];
        let mut v = target;
        while v != self.source {
            v = self.pred[v];
            path.push(v);
        }
        path.reverse();
        Some(path)
    }
}

fn check_vertex(g: &GeometricGraph, v: usize) -> Result<()> {
    if v >= g.n() {
        return Err(Error::InvalidVertex { id: v, n: g.n() });
    }
    Ok(())
}

/// Breadth-first search; distances are hop counts.
pub fn bfs(g: &GeometricGraph, source: usize, target: Option<usize>) -> Result<SearchTree> {
    check_vertex(g, source)?;
    let n = g.n();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![NO_PRED; n];
    let mut queue = VecDeque::new();
    dist[source] = 0.0;
    queue.push_back(source);
    // The whole level containing the target must be expanded so every
    // optimal predecessor of the target has been seen.
    let mut stop_level = f64::INFINITY;
    while let Some(u) = queue.pop_front() {
        if dist[u] >= stop_level {
            break;
        }
        let next = dist[u] + 1.0;
        for (v, _) in g.neighbors(u) {
            if dist[v] == f64::INFINITY {
                dist[v] = next;
                pred[v] = u;
                queue.push_back(v);
                if Some(v) == target {
                    stop_level = next;
                }
            } else if dist[v] == next && u < pred[v] {
                pred[v] = u;
            }
        }
    }
    Ok(SearchTree { source, dist, pred })
}

/// Dijkstra with decrease-by-reinsertion. Stops early once `target` is settled.
pub fn dijkstra(g: &GeometricGraph, source: usize, target: Option<usize>) -> Result<SearchTree> {
    check_vertex(g, source)?;
    let n = g.n();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![NO_PRED; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapEntry { dist: 0.0, vertex: source });
    while let Some(HeapEntry { dist: du, vertex: u }) = heap.pop() {
        if settled[u] {
            continue;
        }
        settled[u] = true;
        if Some(u) == target {
            break;
        }
        for (v, w) in g.neighbors(u) {
            if settled[v] {
                continue;
            }
            let nd = du + w;
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = u;
                heap.push(HeapEntry { dist: nd, vertex: v });
            } else if nd == dist[v] && u < pred[v] {
                pred[v] = u;
            }
        }
    }
    if let Some(t) = target {
        // Vertices that were reached but not settled carry tentative values.
        for (v, s) in settled.iter().enumerate() {
            if !s && v != t {
                dist[v] = f64::INFINITY;
            }
        }
    }
    Ok(SearchTree { source, dist, pred })
}

fn search(g: &GeometricGraph, source: usize, target: Option<usize>) -> Result<SearchTree> {
    if g.is_unit() {
        bfs(g, source, target)
    } else {
        dijkstra(g, source, target)
    }
}

/// Shortest path between two vertices: hop count on unit graphs, weight sum
/// otherwise.
pub fn sp_distance(g: &GeometricGraph, source: usize, target: usize) -> Result<PathResult> {
    check_vertex(g, target)?;
    let tree = search(g, source, Some(target))?;
    Ok(match tree.path_to(target) {
        Some(path) => PathResult { length: tree.dist[target], path, reachable: true },
        None => PathResult::unreachable(),
    })
}

/// Distances from `source` to every vertex; `f64::INFINITY` marks other components.
pub fn sp_all_from(g: &GeometricGraph, source: usize) -> Result<Vec<f64>> {
    Ok(search(g, source, None)?.dist)
}

/// Full search tree from `source`.
pub fn sp_tree(g: &GeometricGraph, source: usize) -> Result<SearchTree> {
    search(g, source, None)
}

/// Dense symmetric matrix of pairwise distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = f(i, j);
            }
        }
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

/// Pairwise shortest-path distances among `subset`, which must lie in a
/// single connected component.
pub fn sp_matrix(g: &GeometricGraph, subset: &[usize]) -> Result<DistanceMatrix> {
    for &v in subset {
        check_vertex(g, v)?;
    }
    let labels = component_labels(g);
    if let Some(&first) = subset.first() {
        if let Some(&other) = subset.iter().find(|&&v| labels[v] != labels[first]) {
            return Err(Error::Disconnected(first, other));
        }
    }
    let m = subset.len();
    let rows: Vec<Vec<f64>> = subset
        .par_iter()
        .map(|&s| sp_all_from(g, s).map(|all| subset.iter().map(|&t| all[t]).collect()))
        .collect::<Result<_>>()?;
    // Summation order differs between directions; mirror the upper triangle.
    let mut data = vec![0.0; m * m];
    for i in 0..m {
        for j in i + 1..m {
            data[i * m + j] = rows[i][j];
            data[j * m + i] = rows[i][j];
        }
    }
    Ok(DistanceMatrix { n: m, data })
}

/// Connected-component label per vertex; labels are numbered in order of
/// each component's smallest vertex.
pub fn component_labels(g: &GeometricGraph) -> Vec<usize> {
    let mut label = vec![usize::MAX; g.n()];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for s in 0..g.n() {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = next;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for (v, _) in g.neighbors(u) {
                if label[v] == usize::MAX {
                    label[v] = next;
                    queue.push_back(v);
                }
            }
        }
        next += 1;
    }
    label
}

/// Vertices of the largest connected component, sorted. Ties go to the
/// component containing the smallest vertex id.
pub fn largest_component(g: &GeometricGraph) -> Vec<usize> {
    if g.n() == 0 {
        return Vec::new();
    }
    let labels = component_labels(g);
    let count = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; count];
    for &l in &labels {
        sizes[l] += 1;
    }
    let best = (0..count).fold(0, |b, l| if sizes[l] > sizes[b] { l } else { b });
    (0..g.n()).filter(|&v| labels[v] == best).collect()
}
