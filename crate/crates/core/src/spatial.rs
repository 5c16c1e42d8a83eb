//! Exact kd-tree for k-nearest-neighbor and fixed-radius queries.
//!
//! Results are identical to a brute-force scan: neighbors are ordered by
//! (squared distance, id), so equidistant points come back lowest id first.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::density::SampleSet;
use crate::error::{Error, Result};

pub const DEFAULT_LEAF_SIZE: usize = 16;

/// A neighbor returned by a query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub id: usize,
    pub dist: f64,
}

#[derive(Debug, Clone)]
struct Node {
    start: usize,
    end: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    children: Option<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct SpatialIndex<'a> {
    points: &'a SampleSet,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

#[derive(Clone, Copy, PartialEq)]
struct Candidate {
    d2: f64,
    id: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2.total_cmp(&other.d2).then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[inline]
pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl<'a> SpatialIndex<'a> {
    pub fn build(points: &'a SampleSet) -> Result<Self> {
        Self::with_leaf_size(points, DEFAULT_LEAF_SIZE)
    }

    pub fn with_leaf_size(points: &'a SampleSet, leaf_size: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("cannot index an empty point set".into()));
        }
        let mut index = Self { points, order: (0..points.len()).collect(), nodes: Vec::new() };
        index.split(0, points.len(), leaf_size.max(1));
        Ok(index)
    }

    pub fn points(&self) -> &SampleSet {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn split(&mut self, start: usize, end: usize, leaf_size: usize) -> usize {
        let d = self.points.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for &i in &self.order[start..end] {
            for (a, &v) in self.points.point(i).iter().enumerate() {
                lo[a] = lo[a].min(v);
                hi[a] = hi[a].max(v);
            }
        }
        // Split along the widest axis; ties go to the lowest axis.
        let axis = (0..d).fold(0, |best, a| if hi[a] - lo[a] > hi[best] - lo[best] { a } else { best });
        let node = self.nodes.len();
        self.nodes.push(Node { start, end, lo, hi, children: None });
        if end - start <= leaf_size {
            return node;
        }

        let mid = start + (end - start) / 2;
        let points = self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&i, &j| {
            points.point(i)[axis].total_cmp(&points.point(j)[axis]).then(i.cmp(&j))
        });
        let left = self.split(start, mid, leaf_size);
        let right = self.split(mid, end, leaf_size);
        self.nodes[node].children = Some((left, right));
        node
    }

    fn box_dist2(node: &Node, x: &[f64]) -> f64 {
        x.iter()
            .zip(node.lo.iter().zip(&node.hi))
            .map(|(v, (l, h))| {
                let gap = if v < l {
                    l - v
                } else if v > h {
                    v - h
                } else {
                    0.0
                };
                gap * gap
            })
            .sum()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.points.dim() {
            return Err(Error::DimensionMismatch { expected: self.points.dim(), got: x.len() });
        }
        Ok(())
    }

    /// The `k` nearest points to an arbitrary location, `1 <= k <= n`.
    pub fn knn(&self, x: &[f64], k: usize) -> Result<Vec<Neighbor>> {
        self.check_dim(x)?;
        if k == 0 || k > self.len() {
            return Err(Error::InvalidArgument(format!("k = {k} outside [1, {}]", self.len())));
        }
        Ok(self.knn_impl(x, k, None))
    }

    /// The `k` nearest neighbors of dataset point `id`, excluding `id`
    /// itself; `1 <= k <= n - 1`. Duplicates of `id` are still returned.
    pub fn knn_of(&self, id: usize, k: usize) -> Result<Vec<Neighbor>> {
        self.check_id(id)?;
        if k == 0 || k >= self.len() {
            return Err(Error::InvalidArgument(format!("k = {k} outside [1, {}]", self.len() - 1)));
        }
        Ok(self.knn_impl(self.points.point(id), k, Some(id)))
    }

    fn knn_impl(&self, x: &[f64], k: usize, exclude: Option<usize>) -> Vec<Neighbor> {
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
        let mut stack = vec![0usize];
        while let Some(node_id) = stack.pop() {
            let node = &self.nodes[node_id];
            if heap.len() == k && Self::box_dist2(node, x) > heap.peek().map_or(f64::INFINITY, |c| c.d2) {
                continue;
            }
            match node.children {
                None => {
                    for &id in &self.order[node.start..node.end] {
                        if Some(id) == exclude {
                            continue;
                        }
                        let cand = Candidate { d2: dist2(self.points.point(id), x), id };
                        if heap.len() < k {
                            heap.push(cand);
                        } else if cand < *heap.peek().expect("heap is full") {
                            heap.pop();
                            heap.push(cand);
                        }
                    }
                }
                Some((left, right)) => {
                    let dl = Self::box_dist2(&self.nodes[left], x);
                    let dr = Self::box_dist2(&self.nodes[right], x);
                    // Push the farther child first so the nearer one is explored first.
                    if dl <= dr {
                        stack.push(right);
                        stack.push(left);
                    } else {
                        stack.push(left);
                        stack.push(right);
                    }
                }
            }
        }
        heap.into_sorted_vec().into_iter().map(|c| Neighbor { id: c.id, dist: c.d2.sqrt() }).collect()
    }

    /// Ids of all points within distance `eps` (inclusive) of `x`, sorted by id.
    pub fn range(&self, x: &[f64], eps: f64) -> Result<Vec<usize>> {
        self.check_dim(x)?;
        Ok(self.range_with_dist(x, eps, None)?.into_iter().map(|n| n.id).collect())
    }

    /// Like [`range`](Self::range) around dataset point `id`, excluding `id`.
    pub fn range_of(&self, id: usize, eps: f64) -> Result<Vec<usize>> {
        self.check_id(id)?;
        Ok(self.range_with_dist(self.points.point(id), eps, Some(id))?.into_iter().map(|n| n.id).collect())
    }

    pub(crate) fn range_with_dist(&self, x: &[f64], eps: f64, exclude: Option<usize>) -> Result<Vec<Neighbor>> {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
        }
        let r2 = eps * eps;
        let mut out = Vec::new();
        let mut stack = vec![0usize];
        while let Some(node_id) = stack.pop() {
            let node = &self.nodes[node_id];
            if Self::box_dist2(node, x) > r2 {
                continue;
            }
            match node.children {
                None => {
                    for &id in &self.order[node.start..node.end] {
                        let d2 = dist2(self.points.point(id), x);
                        if d2 <= r2 && Some(id) != exclude {
                            out.push(Neighbor { id, dist: d2.sqrt() });
                        }
                    }
                }
                Some((left, right)) => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        out.sort_unstable_by_key(|n| n.id);
        Ok(out)
    }

    fn check_id(&self, id: usize) -> Result<()> {
        if id >= self.len() {
            return Err(Error::InvalidVertex { id, n: self.len() });
        }
        Ok(())
    }
}
