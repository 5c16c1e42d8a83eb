//! Symmetric kNN graphs and epsilon-graphs with weighted edges.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::density::{parse_header, SampleSet};
use crate::error::{Error, Result};
use crate::spatial::{Neighbor, SpatialIndex};
use crate::theory;
use crate::weights::{check_subadditive, WeightScheme};

/// Number of random pairs used to verify declared subadditivity.
const SUBADDITIVITY_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphMode {
    Knn { k: usize },
    Eps { eps: f64 },
}

impl fmt::Display for GraphMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphMode::Knn { k } => write!(f, "mode=knn param={k}"),
            GraphMode::Eps { eps } => write!(f, "mode=eps param={eps}"),
        }
    }
}

/// How a graph was built.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphMeta {
    pub mode: GraphMode,
    pub scheme: String,
    pub seed: u64,
    /// Radius used by corollary-f weights, if any.
    pub r: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

/// Immutable undirected weighted graph over sample points.
///
/// Each edge is stored once with `i < j` and traversed both ways through
/// compressed neighbor lists sorted by neighbor id.
#[derive(Debug, Clone)]
pub struct GeometricGraph {
    n: usize,
    d: usize,
    points: Option<SampleSet>,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    unit: bool,
    meta: GraphMeta,
}

impl GeometricGraph {
    /// Symmetric ("or"-rule) kNN graph: `i ~ j` iff either is among the
    /// other's `k` nearest neighbors.
    pub fn build_knn(points: &SampleSet, k: usize, scheme: &WeightScheme) -> Result<Self> {
        let n = points.len();
        if k == 0 || k >= n {
            return Err(Error::InvalidArgument(format!("k = {k} outside [1, {}]", n.saturating_sub(1))));
        }
        let index = SpatialIndex::build(points)?;
        let lists: Vec<Vec<Neighbor>> = (0..n).into_par_iter().map(|i| index.knn_of(i, k)).collect::<Result<_>>()?;
        let mut pairs: Vec<(usize, usize, f64)> = Vec::with_capacity(n * k);
        for (i, list) in lists.iter().enumerate() {
            for nb in list {
                if nb.dist == 0.0 {
                    return Err(Error::DegenerateEdge(i.min(nb.id), i.max(nb.id)));
                }
                pairs.push((i.min(nb.id), i.max(nb.id), nb.dist));
            }
        }
        let r = theory::rescale_factor(n, k, points.dim());
        let scheme = scheme.with_default_r(r);
        Self::assemble(points, pairs, &scheme, GraphMode::Knn { k })
    }

    /// Epsilon-graph: `i ~ j` iff `|x_i - x_j| <= eps`.
    pub fn build_eps(points: &SampleSet, eps: f64, scheme: &WeightScheme) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
        }
        if matches!(scheme, WeightScheme::CorollaryF { r: None, .. }) {
            return Err(Error::InvalidArgument("corollary-f weights on an eps-graph need an explicit r".into()));
        }
        let index = SpatialIndex::build(points)?;
        let lists: Vec<Vec<Neighbor>> = (0..points.len())
            .into_par_iter()
            .map(|i| index.range_with_dist(points.point(i), eps, Some(i)))
            .collect::<Result<_>>()?;
        let mut pairs = Vec::new();
        for (i, list) in lists.iter().enumerate() {
            for nb in list.iter().filter(|nb| nb.id > i) {
                if nb.dist == 0.0 {
                    return Err(Error::DegenerateEdge(i, nb.id));
                }
                pairs.push((i, nb.id, nb.dist));
            }
        }
        Self::assemble(points, pairs, scheme, GraphMode::Eps { eps })
    }

    fn assemble(
        points: &SampleSet,
        mut pairs: Vec<(usize, usize, f64)>,
        scheme: &WeightScheme,
        mode: GraphMode,
    ) -> Result<Self> {
        pairs.par_sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        pairs.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);

        let d = points.dim();
        if scheme.declares_subadditive()
            && !pairs.is_empty()
            && !matches!(scheme, WeightScheme::Unit | WeightScheme::Euclidean)
        {
            let longest = pairs.iter().map(|p| p.2).fold(0.0, f64::max);
            let h = |t: f64| scheme.weight_for_length(t, d).unwrap_or(f64::NAN);
            check_subadditive(&h, longest, SUBADDITIVITY_SAMPLES, 0x5eed)?;
        }

        let edges = pairs
            .into_iter()
            .map(|(i, j, t)| {
                let w = scheme.weight_for_length(t, d)?;
                if !(w > 0.0 && w.is_finite()) {
                    return Err(Error::InvalidWeight { i, j, weight: w });
                }
                Ok(Edge { i, j, w })
            })
            .collect::<Result<Vec<_>>>()?;
        let meta = GraphMeta { mode, scheme: scheme.tag(), seed: points.seed(), r: scheme.corollary_r() };
        let mut g = Self::from_sorted_edges(points.len(), d, edges, scheme.is_unit(), meta);
        g.points = Some(points.clone());
        Ok(g)
    }

    /// Graph from an explicit edge list. Rejects self-loops, duplicate
    /// edges and non-positive weights. `unit` selects hop-count semantics.
    pub fn from_edges(n: usize, d: usize, edges: Vec<Edge>, unit: bool, meta: GraphMeta) -> Result<Self> {
        let mut normalized = Vec::with_capacity(edges.len());
        for e in edges {
            if e.i >= n || e.j >= n {
                return Err(Error::InvalidVertex { id: e.i.max(e.j), n });
            }
            if e.i == e.j {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {}", e.i)));
            }
            if !(e.w > 0.0 && e.w.is_finite()) || (unit && e.w != 1.0) {
                return Err(Error::InvalidWeight { i: e.i, j: e.j, weight: e.w });
            }
            normalized.push(Edge { i: e.i.min(e.j), j: e.i.max(e.j), w: e.w });
        }
        normalized.sort_unstable_by_key(|e| (e.i, e.j));
        if let Some(w) = normalized.windows(2).find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(Error::InvalidArgument(format!("duplicate edge ({}, {})", w[0].i, w[0].j)));
        }
        Ok(Self::from_sorted_edges(n, d, normalized, unit, meta))
    }

    /// Attaches coordinates to a graph built from an edge list.
    pub fn with_points(mut self, points: SampleSet) -> Result<Self> {
        if points.len() != self.n || points.dim() != self.d {
            return Err(Error::InvalidArgument("point set does not match the graph".into()));
        }
        self.points = Some(points);
        Ok(self)
    }

    fn from_sorted_edges(n: usize, d: usize, edges: Vec<Edge>, unit: bool, meta: GraphMeta) -> Self {
        let mut degree = vec![0usize; n];
        for e in &edges {
            degree[e.i] += 1;
            degree[e.j] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + degree[v];
        }
        let mut cursor = offsets[..n].to_vec();
        let mut targets = vec![0u32; offsets[n]];
        let mut weights = vec![0.0; offsets[n]];
        // Edges are sorted by (i, j), so each list is filled in increasing
        // neighbor order: lower neighbors arrive from the `j` side first.
        let mut by_j: Vec<&Edge> = edges.iter().collect();
        by_j.sort_unstable_by_key(|e| (e.j, e.i));
        for e in &by_j {
            targets[cursor[e.j]] = e.i as u32;
            weights[cursor[e.j]] = e.w;
            cursor[e.j] += 1;
        }
        for e in &edges {
            targets[cursor[e.i]] = e.j as u32;
            weights[cursor[e.i]] = e.w;
            cursor[e.i] += 1;
        }
        Self { n, d, points: None, edges, offsets, targets, weights, unit, meta }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn points(&self) -> Option<&SampleSet> {
        self.points.as_ref()
    }

    pub fn meta(&self) -> &GraphMeta {
        &self.meta
    }

    /// True when all weights are 1 and paths are measured in hops.
    pub fn is_unit(&self) -> bool {
        self.unit
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Neighbors of `v` with edge weights, in increasing neighbor id.
    #[inline]
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.targets[range.clone()].iter().map(|&t| t as usize).zip(self.weights[range].iter().copied())
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let range = self.offsets[a]..self.offsets[a + 1];
        self.targets[range].binary_search(&(b as u32)).is_ok()
    }

    pub fn edge_weight_between(&self, a: usize, b: usize) -> Option<f64> {
        let range = self.offsets[a]..self.offsets[a + 1];
        self.targets[range.clone()].binary_search(&(b as u32)).ok().map(|pos| self.weights[range.start + pos])
    }

    pub fn header(&self) -> String {
        format!("# n={} d={} {} scheme={} seed={}", self.n, self.d, self.meta.mode, self.meta.scheme, self.meta.seed)
    }

    /// Writes the header line and one `i j w` line per edge (`i < j`),
    /// weights with 17 significant digits.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", self.header())?;
        for e in &self.edges {
            writeln!(out, "{} {} {:.16e}", e.i, e.j, e.w)?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.write_text(&mut out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        const WHAT: &str = "graph file";
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(WHAT, "empty input"))?
            .map_err(|e| Error::parse(WHAT, e.to_string()))?;
        let fields = parse_header(&header, WHAT)?;
        let get = |key: &str| -> Result<&str> {
            fields
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::parse(WHAT, format!("header lacks `{key}`")))
        };
        let num = |key: &str| -> Result<u64> {
            get(key)?.parse().map_err(|_| Error::parse(WHAT, format!("bad value for `{key}`")))
        };
        let (n, d, seed) = (num("n")? as usize, num("d")? as usize, num("seed")?);
        let param = get("param")?;
        let mode = match get("mode")? {
            "knn" => GraphMode::Knn { k: param.parse().map_err(|_| Error::parse(WHAT, "bad k"))? },
            "eps" => GraphMode::Eps { eps: param.parse().map_err(|_| Error::parse(WHAT, "bad eps"))? },
            other => return Err(Error::parse(WHAT, format!("unknown mode `{other}`"))),
        };
        let scheme = get("scheme")?.to_string();
        let unit = scheme == "unit";
        let mut edges = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::parse(WHAT, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let mut field = |name: &str| {
                it.next().ok_or_else(|| Error::parse(WHAT, format!("line {}: missing {name}", lineno + 2)))
            };
            let bad = |name: &str| Error::parse(WHAT, format!("line {}: bad {name}", lineno + 2));
            let i = field("i")?.parse().map_err(|_| bad("i"))?;
            let j = field("j")?.parse().map_err(|_| bad("j"))?;
            let w = field("w")?.parse().map_err(|_| bad("w"))?;
            if i >= j {
                return Err(Error::parse(WHAT, format!("line {}: edges must satisfy i < j", lineno + 2)));
            }
            edges.push(Edge { i, j, w });
        }
        Self::from_edges(n, d, edges, unit, GraphMeta { mode, scheme, seed, r: None })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_text(std::io::BufReader::new(file))
    }
}
