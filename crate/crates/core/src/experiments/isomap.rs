//! Isomap on kNN shortest-path distances and the density distortion it
//! introduces.

use std::fmt;

use rand::Rng as _;
use rayon::prelude::*;

use super::report::{render_svg, Tabular};
use super::{fmt_f, over_trials, trial_seed, ExperimentConfig};
use crate::density::{Component, DensityModel, Domain, SampleSet};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream};
use crate::shortest_path::{largest_component, sp_matrix, DistanceMatrix};
use crate::spatial::dist2;
use crate::weights::WeightScheme;
use crate::GeometricGraph;

pub const MDS_TOLERANCE: f64 = 1e-10;
pub const MDS_MAX_ITERATIONS: usize = 10_000;

/// Result of classical MDS.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    /// One row per input point; fewer than the requested columns when the
    /// spectrum has fewer positive eigenvalues.
    pub coords: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub warnings: Vec<String>,
}

impl Embedding {
    pub fn dims(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        dist2(&self.coords[i], &self.coords[j]).sqrt()
    }
}

fn matvec(b: &[f64], n: usize, v: &[f64], out: &mut [f64]) {
    out.par_iter_mut().enumerate().for_each(|(i, o)| {
        *o = b[i * n..(i + 1) * n].iter().zip(v).map(|(x, y)| x * y).sum();
    });
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Classical (Torgerson) MDS: double-center `-D^2 / 2` and take the top
/// `dim` eigenpairs by power iteration with deflation. Negative
/// eigenvalues met on the way are deflated and skipped.
pub fn classical_mds(distances: &DistanceMatrix, dim: usize, seed: u64) -> Result<Embedding> {
    let n = distances.n();
    if n == 0 || dim == 0 {
        return Err(Error::InvalidArgument("MDS needs at least one point and one dimension".into()));
    }
    for i in 0..n {
        if distances.get(i, i) != 0.0 {
            return Err(Error::InvalidArgument(format!("distance matrix has nonzero diagonal at {i}")));
        }
        for j in 0..i {
            let (a, b) = (distances.get(i, j), distances.get(j, i));
            if !a.is_finite() || (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "distance matrix is not finite and symmetric at ({i}, {j})"
                )));
            }
        }
    }
    if n == 1 {
        return Ok(Embedding { coords: vec![vec![0.0; dim]], eigenvalues: vec![0.0; dim], warnings: Vec::new() });
    }

    let mut b = vec![0.0; n * n];
    let mut row_mean = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            let d2 = distances.get(i, j).powi(2);
            b[i * n + j] = d2;
            row_mean[i] += d2 / n as f64;
        }
    }
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    for i in 0..n {
        for j in 0..n {
            b[i * n + j] = -0.5 * (b[i * n + j] - row_mean[i] - row_mean[j] + grand);
        }
    }
    let scale = b.iter().map(|x| x * x).sum::<f64>().sqrt();

    let mut rng = stream(seed, 0);
    let mut deflated: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut positive: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut warnings = Vec::new();
    let mut w = vec![0.0; n];
    let max_attempts = 2 * dim + 16;
    for _ in 0..max_attempts {
        if positive.len() == dim || scale == 0.0 {
            break;
        }
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let nv = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= nv);
        let mut lambda = f64::NAN;
        let mut converged = false;
        for _ in 0..MDS_MAX_ITERATIONS {
            matvec(&b, n, &v, &mut w);
            for (l, u) in &deflated {
                let c = l * dot(u, &v);
                w.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
            }
            let next = dot(&v, &w);
            let nw = dot(&w, &w).sqrt();
            if nw <= 1e-14 * scale {
                lambda = 0.0;
                converged = true;
                break;
            }
            v.iter_mut().zip(&w).for_each(|(x, y)| *x = y / nw);
            let done = (next - lambda).abs() <= MDS_TOLERANCE * next.abs().max(1e-4 * scale);
            lambda = next;
            if done {
                converged = true;
                break;
            }
        }
        if !converged {
            warnings.push(format!("eigenpair {} did not converge in {MDS_MAX_ITERATIONS} iterations", deflated.len()));
        }
        if lambda > 1e-9 * scale {
            // Rayleigh quotient of the normalized iterate.
            matvec(&b, n, &v, &mut w);
            for (l, u) in &deflated {
                let c = l * dot(u, &v);
                w.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
            }
            let lambda = dot(&v, &w);
            deflated.push((lambda, v.clone()));
            positive.push((lambda, v));
        } else if lambda < -1e-9 * scale {
            deflated.push((lambda, v));
        } else {
            break;
        }
    }
    if positive.len() < dim {
        warnings.push(format!("only {} of {dim} requested eigenvalues are positive", positive.len()));
    }
    positive.sort_by(|a, b| b.0.total_cmp(&a.0));
    let coords = (0..n).map(|i| positive.iter().map(|(l, v)| v[i] * l.sqrt()).collect()).collect();
    Ok(Embedding { coords, eigenvalues: positive.iter().map(|p| p.0).collect(), warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    Unweighted,
    Euclidean,
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pipeline::Unweighted => "unweighted",
            Pipeline::Euclidean => "euclidean",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Region {
    High(usize),
    Low,
    Ramp,
}

/// High: on the plateau of a ramped box. Low: outside every box's support.
fn region(components: &[Component], x: &[f64]) -> Region {
    if let Some(i) = components.iter().position(|c| c.on_plateau(x)) {
        return Region::High(i);
    }
    if components.iter().all(|c| c.outside_support(x)) {
        Region::Low
    } else {
        Region::Ramp
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsomapRow {
    pub trial: usize,
    /// `model`, or `uniform-control` for the uniform sample with the same regions.
    pub sample: String,
    pub pipeline: Pipeline,
    pub n_used: usize,
    /// True when the graph was disconnected and only its largest component was embedded.
    pub restricted: bool,
    pub high_points: usize,
    pub low_points: usize,
    pub high_stretch: f64,
    pub low_stretch: f64,
}

impl IsomapRow {
    /// High-density stretch over low-density stretch.
    pub fn stretch_ratio(&self) -> f64 {
        self.high_stretch / self.low_stretch
    }
}

impl Tabular for IsomapRow {
    fn columns() -> &'static [&'static str] {
        &[
            "trial",
            "sample",
            "pipeline",
            "n_used",
            "restricted",
            "high_points",
            "low_points",
            "high_stretch",
            "low_stretch",
            "stretch_ratio",
        ]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.trial.to_string(),
            self.sample.clone(),
            self.pipeline.to_string(),
            self.n_used.to_string(),
            self.restricted.to_string(),
            self.high_points.to_string(),
            self.low_points.to_string(),
            fmt_f(self.high_stretch),
            fmt_f(self.low_stretch),
            fmt_f(self.stretch_ratio()),
        ]
    }
}

/// Rows plus a figure of the first embedding.
#[derive(Debug, Clone)]
pub struct IsomapOutput {
    pub rows: Vec<IsomapRow>,
    pub figure: Option<String>,
    pub warnings: Vec<String>,
}

struct Embedded {
    row: IsomapRow,
    embedding: Embedding,
    labels: Vec<Region>,
}

/// Mean embedded over mean original distance across same-region pairs.
fn stretch(points: &SampleSet, subset: &[usize], emb: &Embedding, labels: &[Region], high: bool) -> (usize, f64) {
    let members: Vec<usize> = (0..subset.len())
        .filter(|&i| if high { matches!(labels[i], Region::High(_)) } else { labels[i] == Region::Low })
        .collect();
    let (mut orig, mut embd) = (0.0, 0.0);
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            if labels[i] == labels[j] {
                orig += dist2(points.point(subset[i]), points.point(subset[j])).sqrt();
                embd += emb.distance(i, j);
            }
        }
    }
    (members.len(), if orig > 0.0 { embd / orig } else { f64::NAN })
}

fn embed(
    points: &SampleSet,
    k: usize,
    pipeline: Pipeline,
    components: &[Component],
    dim: usize,
    seed: u64,
    trial: usize,
    sample: &str,
) -> Result<Embedded> {
    let scheme = match pipeline {
        Pipeline::Unweighted => WeightScheme::Unit,
        Pipeline::Euclidean => WeightScheme::Euclidean,
    };
    let g = GeometricGraph::build_knn(points, k, &scheme)?;
    let subset = largest_component(&g);
    let dm = sp_matrix(&g, &subset)?;
    let embedding = classical_mds(&dm, dim, seed)?;
    let labels: Vec<Region> = subset.iter().map(|&v| region(components, points.point(v))).collect();
    let (high_points, high_stretch) = stretch(points, &subset, &embedding, &labels, true);
    let (low_points, low_stretch) = stretch(points, &subset, &embedding, &labels, false);
    Ok(Embedded {
        row: IsomapRow {
            trial,
            sample: sample.into(),
            pipeline,
            n_used: subset.len(),
            restricted: subset.len() < points.len(),
            high_points,
            low_points,
            high_stretch,
            low_stretch,
        },
        embedding,
        labels,
    })
}

/// Embeds unweighted and Euclidean-weighted kNN shortest-path distances of
/// each trial's sample and reports per-region stretch. With `control` set,
/// a uniform sample is processed with the same region geometry.
pub fn run_isomap_demo(config: &ExperimentConfig) -> Result<IsomapOutput> {
    let model = config.density.model()?;
    let components: Vec<Component> =
        model.components().iter().filter(|c| matches!(c, Component::RampedBox { .. })).cloned().collect();
    if components.is_empty() {
        return Err(Error::InvalidArgument("isomap regions need a density with plateau boxes".into()));
    }
    let control = DensityModel::uniform(model.domain().clone());
    let results = over_trials(config, |n, trial| {
        let k = config.k.k_for(n);
        let mut out = Vec::new();
        let mut samples = vec![("model", model.sample(n, trial_seed(config.seed, n, trial))?)];
        if config.control {
            samples
                .push(("uniform-control", control.sample(n, derive_seed(config.seed, &[n as u64, trial as u64, 1]))?));
        }
        for (name, points) in &samples {
            for pipeline in [Pipeline::Unweighted, Pipeline::Euclidean] {
                let seed = derive_seed(config.seed, &[n as u64, trial as u64, 2]);
                let e = embed(points, k, pipeline, &components, config.dim, seed, trial, name)?;
                let keep = trial == 0 && *name == "model" && pipeline == Pipeline::Unweighted;
                out.push((e, keep));
            }
        }
        Ok(out)
    })?;

    let mut warnings = Vec::new();
    let mut figure = None;
    let mut rows = Vec::with_capacity(results.len());
    for (e, keep) in results {
        for w in &e.embedding.warnings {
            warnings.push(format!("trial {} {} {}: {w}", e.row.trial, e.row.sample, e.row.pipeline));
        }
        if e.row.restricted {
            warnings.push(format!(
                "trial {} {} {}: graph disconnected, embedded the largest component ({} points)",
                e.row.trial, e.row.sample, e.row.pipeline, e.row.n_used
            ));
        }
        if keep && figure.is_none() {
            figure = embedding_figure(&e)?;
        }
        rows.push(e.row);
    }
    Ok(IsomapOutput { rows, figure, warnings })
}

fn embedding_figure(e: &Embedded) -> Result<Option<String>> {
    if e.embedding.dims() < 2 {
        return Ok(None);
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for c in &e.embedding.coords {
        for a in 0..2 {
            lo[a] = lo[a].min(c[a]);
            hi[a] = hi[a].max(c[a]);
        }
    }
    let side = (hi[0] - lo[0]).max(hi[1] - lo[1]) * 1.05;
    let domain = Domain::new(
        vec![(lo[0] + hi[0] - side) / 2.0, (lo[1] + hi[1] - side) / 2.0],
        vec![(lo[0] + hi[0] + side) / 2.0, (lo[1] + hi[1] + side) / 2.0],
    )?;
    let pts: Vec<([f64; 2], &str)> = e
        .embedding
        .coords
        .iter()
        .zip(&e.labels)
        .map(|(c, r)| {
            let class = match r {
                Region::High(_) => "high",
                Region::Low => "low",
                Region::Ramp => "ramp",
            };
            ([c[0], c[1]], class)
        })
        .collect();
    Ok(Some(render_svg(&domain, None, &pts, &[])))
}
