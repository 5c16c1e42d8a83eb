//! Independent oracles and property checks shared by the integration tests.
#![allow(dead_code)]

use knnsp::experiments::{self, report::write_csv, DensitySpec, Experiment, ExperimentConfig, KRule, PairSpec};
use knnsp::oracle::{stencil_distortion, ContinuumOracle};
use knnsp::shortest_path::{sp_all_from, sp_distance};
use knnsp::spatial::SpatialIndex;
use knnsp::{
    DensityModel, Domain, Edge, GaussianBump, GeometricGraph, GraphMeta, GraphMode, SampleSet, TwoSquares, WeightScheme,
};
use rand::Rng;

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn uniform_points(n: usize, d: usize, seed: u64) -> SampleSet {
    DensityModel::uniform(Domain::unit(d)).sample(n, seed).unwrap()
}

/// Brute-force kNN by full sort on (distance, id).
pub fn brute_knn(points: &SampleSet, x: &[f64], k: usize, exclude: Option<usize>) -> Vec<usize> {
    let mut all: Vec<(f64, usize)> = (0..points.len())
        .filter(|&i| Some(i) != exclude)
        .map(|i| (points.point(i).iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all.into_iter().take(k).map(|p| p.1).collect()
}

pub fn brute_range(points: &SampleSet, x: &[f64], eps: f64, exclude: Option<usize>) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| Some(i) != exclude)
        .filter(|&i| points.point(i).iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= eps * eps)
        .collect()
}

/// All-pairs distances by Floyd-Warshall.
pub fn floyd_warshall(n: usize, edges: &[Edge]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for e in edges {
        d[e.i][e.j] = d[e.i][e.j].min(e.w);
        d[e.j][e.i] = d[e.j][e.i].min(e.w);
    }
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                let alt = d[i][m] + d[m][j];
                if alt < d[i][j] {
                    d[i][j] = alt;
                }
            }
        }
    }
    d
}

/// Connected components by union-find.
pub fn union_find_labels(n: usize, edges: &[Edge]) -> Vec<usize> {
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut c = x;
        while p[c] != r {
            let next = p[c];
            p[c] = r;
            c = next;
        }
        r
    }
    let mut parent: Vec<usize> = (0..n).collect();
    for e in edges {
        let (a, b) = (find(&mut parent, e.i), find(&mut parent, e.j));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    (0..n).map(|v| find(&mut parent, v)).collect()
}

fn check(name: &str, f: impl FnOnce() -> Result<(), String>) -> (String, bool) {
    match f() {
        Ok(()) => (name.to_string(), true),
        Err(msg) => (format!("{name}: {msg}"), false),
    }
}

pub fn sp_metric_axioms(triples: usize, seed: u64) -> Result<(), String> {
    let pts = uniform_points(400, 2, seed);
    let g = GeometricGraph::build_knn(&pts, 8, &WeightScheme::Euclidean).map_err(|e| e.to_string())?;
    let n = g.n();
    let rows: Vec<Vec<f64>> = (0..n).map(|s| sp_all_from(&g, s).unwrap()).collect();
    let mut rng = knnsp::rng::rng(seed ^ 0xabc);
    for _ in 0..triples {
        let (x, y, z) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
        let (dxy, dyx, dxz, dzy) = (rows[x][y], rows[y][x], rows[x][z], rows[z][y]);
        if rows[x][x] != 0.0 {
            return Err(format!("d({x},{x}) != 0"));
        }
        if (dxy - dyx).abs() > 1e-12 * dxy.max(1.0) {
            return Err(format!("asymmetric at ({x},{y})"));
        }
        if dxy > dxz + dzy + 1e-12 {
            return Err(format!("triangle violated at ({x},{y},{z})"));
        }
        if x != y && !(dxy > 0.0) {
            return Err(format!("d({x},{y}) not positive"));
        }
    }
    Ok(())
}

pub fn oracle_metric_axioms(triples: usize, seed: u64) -> Result<(), String> {
    let o = ContinuumOracle::build(Domain::unit(2), 64, |x| 1.0 + 2.0 * x[0] * x[1]).map_err(|e| e.to_string())?;
    let mut rng = knnsp::rng::rng(seed);
    let mut pt = || vec![rng.random::<f64>(), rng.random::<f64>()];
    for _ in 0..triples {
        let (x, y, z) = (pt(), pt(), pt());
        let dxy = o.f_distance(&x, &y).unwrap();
        let dyx = o.f_distance(&y, &x).unwrap();
        let dxz = o.f_distance(&x, &z).unwrap();
        let dzy = o.f_distance(&z, &y).unwrap();
        if o.f_distance(&x, &x).unwrap() != 0.0 {
            return Err("d(x,x) != 0".into());
        }
        if dxy != dyx {
            return Err(format!("asymmetric: {dxy} vs {dyx}"));
        }
        if dxy > dxz + dzy + 1e-12 {
            return Err(format!("triangle violated: {dxy} > {dxz} + {dzy}"));
        }
    }
    Ok(())
}

pub fn knn_prefix_and_or_rule(seed: u64) -> Result<(), String> {
    let pts = uniform_points(300, 2, seed);
    let idx = SpatialIndex::build(&pts).unwrap();
    for i in (0..pts.len()).step_by(7) {
        let a: Vec<usize> = idx.knn_of(i, 5).unwrap().iter().map(|n| n.id).collect();
        let b: Vec<usize> = idx.knn_of(i, 6).unwrap().iter().map(|n| n.id).collect();
        if a[..] != b[..5] {
            return Err(format!("kNN(5) of {i} is not a prefix of kNN(6)"));
        }
    }
    let k = 6;
    let g = GeometricGraph::build_knn(&pts, k, &WeightScheme::Unit).unwrap();
    let lists: Vec<Vec<usize>> = (0..pts.len()).map(|i| brute_knn(&pts, pts.point(i), k, Some(i))).collect();
    for i in 0..pts.len() {
        if g.degree(i) < k {
            return Err(format!("degree of {i} below k"));
        }
        for j in 0..pts.len() {
            let expected = i != j && (lists[i].contains(&j) || lists[j].contains(&i));
            if g.has_edge(i, j) != expected {
                return Err(format!("edge ({i},{j}) disagrees with the or-rule"));
            }
        }
    }
    Ok(())
}

pub fn lipschitz_density(seed: u64) -> Result<(), String> {
    let models = [
        DensityModel::uniform(Domain::unit(2)),
        DensityModel::two_squares(&TwoSquares::default()).unwrap(),
        DensityModel::gaussian_bump(&GaussianBump::default()).unwrap(),
    ];
    let mut rng = knnsp::rng::rng(seed);
    for m in &models {
        let (l, lo, hi) = m.lipschitz_constants();
        for _ in 0..20_000 {
            let x = [rng.random::<f64>(), rng.random::<f64>()];
            let y = [
                (x[0] + 0.05 * (rng.random::<f64>() - 0.5)).clamp(0.0, 1.0),
                (x[1] + 0.05 * (rng.random::<f64>() - 0.5)).clamp(0.0, 1.0),
            ];
            let (px, py) = (m.eval_density(&x).unwrap(), m.eval_density(&y).unwrap());
            if (px - py).abs() > l * dist(&x, &y) * (1.0 + 1e-9) + 1e-12 {
                return Err(format!("{}: Lipschitz bound violated", m.kind()));
            }
            if px < lo * (1.0 - 1e-12) || px > hi * (1.0 + 1e-12) {
                return Err(format!("{}: density {px} outside [{lo}, {hi}]", m.kind()));
            }
        }
    }
    Ok(())
}

/// In balls of radius `p_min lambda / L` the q-distance is within
/// `[(1 - lambda)^(1/d), (1 + lambda)^(1/d)] q(x) |x - y|`, widened by the
/// stencil distortion. Endpoints are lattice nodes, so no snapping error.
pub fn small_ball_band(seed: u64) -> Result<(), String> {
    let model = DensityModel::gaussian_bump(&GaussianBump::default()).unwrap();
    let (l, p_min, _) = model.lipschitz_constants();
    let lambda = 0.4;
    let radius = p_min * lambda / l;
    let m = 512;
    let o = ContinuumOracle::for_q(&model, m).unwrap();
    let cells = (radius * m as f64).floor() as i64;
    if cells < 2 {
        return Err(format!("radius {radius} spans fewer than two cells"));
    }
    let delta = stencil_distortion(2);
    let lo_f = (1.0 - lambda).sqrt() * (1.0 - 1e-12);
    let hi_f = (1.0 + lambda).sqrt() * (1.0 + delta);
    let mut rng = knnsp::rng::rng(seed);
    for _ in 0..200 {
        let (i, j) = (rng.random_range(40..470) as i64, rng.random_range(40..470) as i64);
        let (di, dj) = loop {
            let di = rng.random_range(-cells..=cells);
            let dj = rng.random_range(-cells..=cells);
            if (di, dj) != (0, 0) && ((di * di + dj * dj) as f64).sqrt() <= cells as f64 {
                break (di, dj);
            }
        };
        let x = [i as f64 / m as f64, j as f64 / m as f64];
        let y = [(i + di) as f64 / m as f64, (j + dj) as f64 / m as f64];
        let d = o.f_distance(&x, &y).unwrap();
        let base = model.q_unchecked(&x) * dist(&x, &y);
        if d < lo_f * base || d > hi_f * base {
            return Err(format!("D_q = {d} outside band around {base} at {x:?} -> {y:?}"));
        }
    }
    Ok(())
}

pub fn spatial_matches_brute_force(n: usize, seed: u64) -> Result<(), String> {
    let pts = uniform_points(n, 2, seed);
    let idx = SpatialIndex::with_leaf_size(&pts, 4).unwrap();
    let mut rng = knnsp::rng::rng(seed + 1);
    for _ in 0..50 {
        let x = [rng.random::<f64>(), rng.random::<f64>()];
        let k = rng.random_range(1..=n.min(40));
        let got: Vec<usize> = idx.knn(&x, k).unwrap().iter().map(|n| n.id).collect();
        if got != brute_knn(&pts, &x, k, None) {
            return Err(format!("kNN mismatch at {x:?}, k = {k}"));
        }
        let eps = 0.2 * rng.random::<f64>() + 1e-3;
        if idx.range(&x, eps).unwrap() != brute_range(&pts, &x, eps, None) {
            return Err(format!("range mismatch at {x:?}, eps = {eps}"));
        }
    }
    Ok(())
}

pub fn sp_matches_floyd_warshall(n: usize, seed: u64) -> Result<(), String> {
    let pts = uniform_points(n, 2, seed);
    for scheme in [WeightScheme::Unit, WeightScheme::Euclidean] {
        let g = GeometricGraph::build_knn(&pts, 3, &scheme).unwrap();
        let fw = floyd_warshall(n, g.edges());
        for s in 0..n {
            let all = sp_all_from(&g, s).unwrap();
            for t in 0..n {
                let ok = if fw[s][t].is_infinite() {
                    all[t].is_infinite()
                } else {
                    (all[t] - fw[s][t]).abs() <= 1e-12 * fw[s][t].max(1.0)
                };
                if !ok {
                    return Err(format!("{} ({s},{t}): {} vs {}", scheme.tag(), all[t], fw[s][t]));
                }
                let single = sp_distance(&g, s, t).unwrap();
                if single.reachable && (single.length - all[t]).abs() > 1e-12 * all[t].max(1.0) {
                    return Err(format!("single-pair disagrees at ({s},{t})"));
                }
            }
        }
    }
    Ok(())
}

fn small_experiment(seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::defaults(Experiment::Convergence);
    cfg.density = DensitySpec::TwoSquares(TwoSquares::default());
    cfg.n = vec![800, 1600];
    cfg.k = KRule::Fixed(12);
    cfg.pairs = PairSpec::Fixed(vec![(vec![0.2, 0.5], vec![0.8, 0.5])]);
    cfg.oracle_m = 64;
    cfg.trials = 4;
    cfg.seed = seed;
    cfg
}

pub fn csv_bytes(cfg: &ExperimentConfig) -> Vec<u8> {
    let out = experiments::run(cfg).unwrap();
    let mut buf = Vec::new();
    write_csv(&out.table, &experiments::csv_metadata(cfg), &mut buf).unwrap();
    buf
}

pub fn bit_identical_reruns(seed: u64) -> Result<(), String> {
    let m = DensityModel::two_squares(&TwoSquares::default()).unwrap();
    if m.sample(500, seed).unwrap() != m.sample(500, seed).unwrap() {
        return Err("sampling is not reproducible".into());
    }
    let pts = m.sample(500, seed).unwrap();
    let text = |g: &GeometricGraph| {
        let mut b = Vec::new();
        g.write_text(&mut b).unwrap();
        b
    };
    let a = GeometricGraph::build_knn(&pts, 7, &WeightScheme::Euclidean).unwrap();
    let b = GeometricGraph::build_knn(&pts, 7, &WeightScheme::Euclidean).unwrap();
    if text(&a) != text(&b) {
        return Err("graph build is not reproducible".into());
    }
    let cfg = small_experiment(seed);
    if csv_bytes(&cfg) != csv_bytes(&cfg) {
        return Err("experiment CSV is not reproducible".into());
    }
    Ok(())
}

pub fn components_match_union_find(seed: u64) -> Result<(), String> {
    let pts = uniform_points(300, 2, seed);
    let g = GeometricGraph::build_eps(&pts, 0.06, &WeightScheme::Unit).unwrap();
    let uf = union_find_labels(g.n(), g.edges());
    let bfs = knnsp::shortest_path::component_labels(&g);
    for i in 0..g.n() {
        for j in (i + 1..g.n()).step_by(5) {
            if (uf[i] == uf[j]) != (bfs[i] == bfs[j]) {
                return Err(format!("component labels disagree for ({i},{j})"));
            }
        }
    }
    Ok(())
}

/// Small graph with explicit edges, for hand-built cases.
pub fn graph_from(n: usize, edges: &[(usize, usize, f64)], unit: bool) -> GeometricGraph {
    let meta = GraphMeta {
        mode: GraphMode::Knn { k: 1 },
        scheme: if unit { "unit".into() } else { "euclidean".into() },
        seed: 0,
        r: None,
    };
    let edges = edges.iter().map(|&(i, j, w)| Edge { i, j, w }).collect();
    GeometricGraph::from_edges(n, 2, edges, unit, meta).unwrap()
}

pub fn run_all_property_checks() -> Vec<(String, bool)> {
    vec![
        check("shortest-path metric axioms on 1000 triples", || sp_metric_axioms(1000, 1)),
        check("oracle metric axioms on 1000 triples", || oracle_metric_axioms(1000, 2)),
        check("kNN prefix and or-rule", || knn_prefix_and_or_rule(3)),
        check("density Lipschitz bounds", || lipschitz_density(4)),
        check("small-ball q-distance band", || small_ball_band(5)),
        check("kd-tree equals brute force (n = 500)", || spatial_matches_brute_force(500, 6)),
        check("shortest paths equal Floyd-Warshall (n = 50)", || sp_matches_floyd_warshall(50, 7)),
        check("components equal union-find", || components_match_union_find(8)),
        check("bit-identical reruns", || bit_identical_reruns(9)),
    ]
}
