//! Weighted shortest paths: subadditive `h` weights, corollary weights and
//! the superadditive probe.

use std::sync::Arc;

use rayon::prelude::*;

use super::config::GraphKind;
use super::convergence::figure_points;
use super::report::{render_svg, SvgPath, Tabular};
use super::{
    check_disconnected, fmt_f, over_trials, pair_paths, pair_seed, path_mean_density, snap_pairs, svg_path, trial_seed,
    ExperimentConfig, Reference,
};
use crate::density::{DensityKind, DensityModel, SampleSet};
use crate::error::{Error, Result};
use crate::oracle::Field;
use crate::theory::rescale_factor;
use crate::weights::{check_increasing, check_superadditive, WeightScheme};
use crate::GeometricGraph;

/// Limit field of weighted shortest paths and, when the field is
/// constant, its value.
///
/// kNN graphs with `h` weights converge to `f = h(r / q) q / r` with
/// `r = (k / (n eta_d))^(1/d)`; corollary weights converge to
/// `f = f~(p)`. On epsilon graphs every hop has length close to `eps`, so
/// `f = h(eps) / eps` everywhere.
pub fn limit_field(
    scheme: &WeightScheme,
    model: &DensityModel,
    graph: GraphKind,
    n: usize,
    k: usize,
    eps: f64,
) -> Result<(Field, Option<f64>)> {
    let d = model.dim();
    let uniform = model.kind() == DensityKind::Uniform;
    let m = model.clone();
    let field: Field = match (graph, scheme) {
        (GraphKind::Eps, WeightScheme::CorollaryF { .. }) => {
            return Err(Error::InvalidArgument("corollary weights need a kNN graph".into()));
        }
        (GraphKind::Eps, s) => {
            let c = s.weight_for_length(eps, d)? / eps;
            return Ok((Arc::new(move |_: &[f64]| c), Some(c)));
        }
        (GraphKind::Knn, WeightScheme::CorollaryF { ftilde, .. }) => {
            let ftilde = ftilde.clone();
            Arc::new(move |x: &[f64]| ftilde.eval(m.density_unchecked(x)))
        }
        (GraphKind::Knn, s) => {
            let r = rescale_factor(n, k, d);
            let s = s.clone();
            Arc::new(move |x: &[f64]| {
                let q = m.q_unchecked(x);
                s.weight_for_length(r / q, d).unwrap_or(f64::NAN) * q / r
            })
        }
    };
    let constant = uniform.then(|| field(model.domain().lower()));
    Ok((field, constant))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedRow {
    pub n: usize,
    pub graph: GraphKind,
    /// `k` for kNN graphs, `eps` for epsilon graphs.
    pub param: f64,
    pub trial: usize,
    pub pair: usize,
    pub snap: f64,
    pub connected: bool,
    pub d_sp: f64,
    pub d_f: f64,
    pub ratio: f64,
}

const WEIGHTED_COLUMNS: [&str; 10] =
    ["n", "graph", "param", "trial", "pair", "snap", "connected", "d_sp", "d_f", "ratio"];

impl WeightedRow {
    fn base_cells(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.graph.to_string(),
            fmt_f(self.param),
            self.trial.to_string(),
            self.pair.to_string(),
            fmt_f(self.snap),
            self.connected.to_string(),
            fmt_f(self.d_sp),
            fmt_f(self.d_f),
            fmt_f(self.ratio),
        ]
    }
}

impl Tabular for WeightedRow {
    fn columns() -> &'static [&'static str] {
        &WEIGHTED_COLUMNS
    }

    fn cells(&self) -> Vec<String> {
        self.base_cells()
    }
}

/// A corollary-weight row plus the mean vertex density along the weighted
/// and the unweighted shortest path.
#[derive(Debug, Clone, PartialEq)]
pub struct CorollaryRow {
    pub base: WeightedRow,
    pub weighted_density: f64,
    pub unweighted_density: f64,
}

impl Tabular for CorollaryRow {
    fn columns() -> &'static [&'static str] {
        &[
            "n",
            "graph",
            "param",
            "trial",
            "pair",
            "snap",
            "connected",
            "d_sp",
            "d_f",
            "ratio",
            "weighted_density",
            "unweighted_density",
        ]
    }

    fn cells(&self) -> Vec<String> {
        let mut c = self.base.base_cells();
        c.push(fmt_f(self.weighted_density));
        c.push(fmt_f(self.unweighted_density));
        c
    }
}

struct Setup {
    model: DensityModel,
    scheme: WeightScheme,
    pairs: Vec<(Vec<f64>, Vec<f64>)>,
    /// One reference per entry of `config.n`.
    references: Vec<Reference>,
}

fn setup(config: &ExperimentConfig) -> Result<Setup> {
    let model = config.density.model()?;
    let scheme = config.scheme()?;
    let pairs = config.pairs.resolve(model.domain(), pair_seed(config.seed))?;
    let d = model.dim();
    let references = config
        .n
        .iter()
        .map(|&n| {
            let (field, constant) =
                limit_field(&scheme, &model, config.graph, n, config.k.k_for(n), config.eps.eps_for(n, d))?;
            Reference::new(&model, field, constant, config)
        })
        .collect::<Result<_>>()?;
    Ok(Setup { model, scheme, pairs, references })
}

fn build(
    config: &ExperimentConfig,
    points: &SampleSet,
    n: usize,
    scheme: &WeightScheme,
) -> Result<(GeometricGraph, f64)> {
    Ok(match config.graph {
        GraphKind::Knn => {
            let k = config.k.k_for(n);
            (GeometricGraph::build_knn(points, k, scheme)?, k as f64)
        }
        GraphKind::Eps => {
            let eps = config.eps.eps_for(n, points.dim());
            (GeometricGraph::build_eps(points, eps, scheme)?, eps)
        }
    })
}

/// Per `(n, trial)`: sample, graph, snapped pairs and weighted paths.
fn weighted_trials<T: Send>(
    config: &ExperimentConfig,
    s: &Setup,
    per_trial: impl Fn(usize, &SampleSet, Vec<WeightedRow>, Vec<Vec<usize>>) -> Result<Vec<T>> + Sync,
) -> Result<Vec<T>> {
    let ni = |n: usize| config.n.iter().position(|&m| m == n).expect("n comes from the config");
    over_trials(config, |n, trial| {
        let points = s.model.sample(n, trial_seed(config.seed, n, trial))?;
        let (g, param) = build(config, &points, n, &s.scheme)?;
        let snapped = snap_pairs(&points, &s.pairs)?;
        let reference = &s.references[ni(n)];
        let paths = pair_paths(&g, &snapped)?;
        let rows = snapped
            .par_iter()
            .zip(&paths)
            .enumerate()
            .map(|(pair, (p, (len, _)))| {
                let df = reference.distance(points.point(p.source), points.point(p.target))?;
                let connected = len.is_finite();
                Ok(WeightedRow {
                    n,
                    graph: config.graph,
                    param,
                    trial,
                    pair,
                    snap: p.snap,
                    connected,
                    d_sp: *len,
                    d_f: df,
                    ratio: if connected { len / df } else { f64::NAN },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        per_trial(n, &points, rows, paths.into_iter().map(|p| p.1).collect())
    })
}

fn bad_trials(rows: &[&WeightedRow]) -> usize {
    let mut bad: Vec<(usize, usize)> = rows.iter().filter(|r| !r.connected).map(|r| (r.n, r.trial)).collect();
    bad.dedup();
    bad.len()
}

/// Weighted shortest paths against the oracle for the limit field.
/// The scheme must be in the subadditive regime; graph construction
/// verifies the claim numerically.
pub fn run_weighted_limit(config: &ExperimentConfig) -> Result<Vec<WeightedRow>> {
    Ok(run_weighted_with_figure(config)?.0)
}

pub(crate) fn run_weighted_with_figure(config: &ExperimentConfig) -> Result<(Vec<WeightedRow>, Option<String>)> {
    let s = setup(config)?;
    if !s.scheme.declares_subadditive() {
        return Err(Error::InvalidArgument(format!(
            "scheme `{}` is not subadditive; use the superadditive probe",
            config.scheme
        )));
    }
    let rows = weighted_trials(config, &s, |_, _, rows, _| Ok(rows))?;
    check_disconnected(bad_trials(&rows.iter().collect::<Vec<_>>()), config.n.len() * config.trials, "weighted")?;
    let figure = figure(config, &s, false)?;
    Ok((rows, figure))
}

/// Corollary weights `t f~(r^d / t^d)` against the oracle for `f = f~(p)`,
/// with path densities of the weighted and unweighted shortest paths.
pub fn run_weight_assignment(config: &ExperimentConfig) -> Result<Vec<CorollaryRow>> {
    Ok(run_corollary_with_figure(config)?.0)
}

pub(crate) fn run_corollary_with_figure(config: &ExperimentConfig) -> Result<(Vec<CorollaryRow>, Option<String>)> {
    let s = setup(config)?;
    let WeightScheme::CorollaryF { ftilde, .. } = &s.scheme else {
        return Err(Error::InvalidArgument(format!("scheme `{}` is not a corollary-f scheme", config.scheme)));
    };
    if config.graph != GraphKind::Knn {
        return Err(Error::InvalidArgument("corollary weights need a kNN graph".into()));
    }
    let (_, p_min, p_max) = s.model.lipschitz_constants();
    check_increasing(&|x| ftilde.eval(x), p_min, p_max, 1000)?;

    let rows = weighted_trials(config, &s, |n, points, rows, paths| {
        let unit = GeometricGraph::build_knn(points, config.k.k_for(n), &WeightScheme::Unit)?;
        let snapped = snap_pairs(points, &s.pairs)?;
        let unit_paths = pair_paths(&unit, &snapped)?;
        Ok(rows
            .into_iter()
            .zip(paths.iter().zip(&unit_paths))
            .map(|(base, (wp, (_, up)))| {
                let dens = |p: &[usize]| if p.is_empty() { f64::NAN } else { path_mean_density(&s.model, points, p) };
                CorollaryRow { weighted_density: dens(wp), unweighted_density: dens(up), base }
            })
            .collect())
    })?;
    check_disconnected(
        bad_trials(&rows.iter().map(|r| &r.base).collect::<Vec<_>>()),
        config.n.len() * config.trials,
        "corollary weights",
    )?;
    let figure = figure(config, &s, true)?;
    Ok((rows, figure))
}

fn figure(config: &ExperimentConfig, s: &Setup, with_unweighted: bool) -> Result<Option<String>> {
    if s.model.dim() != 2 {
        return Ok(None);
    }
    let n = config.n[0];
    let points = s.model.sample(n, trial_seed(config.seed, n, 0))?;
    let snapped = snap_pairs(&points, &s.pairs)?;
    let (g, _) = build(config, &points, n, &s.scheme)?;
    let mut paths = Vec::new();
    for (_, p) in pair_paths(&g, &snapped)? {
        paths.push(svg_path(&points, &p, "weighted"));
    }
    if with_unweighted {
        let unit = GeometricGraph::build_knn(&points, config.k.k_for(n), &WeightScheme::Unit)?;
        for (_, p) in pair_paths(&unit, &snapped)? {
            paths.push(svg_path(&points, &p, "unweighted"));
        }
    }
    if let Reference::Lattice(o) = &s.references[0] {
        for p in &snapped {
            let geo = o.geodesic(points.point(p.source), points.point(p.target))?;
            paths.push(SvgPath { class: "oracle".into(), points: geo.points.iter().map(|q| [q[0], q[1]]).collect() });
        }
    }
    Ok(Some(render_svg(s.model.domain(), Some(&s.model), &figure_points(&points), &paths)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperadditiveRow {
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    pub trial: usize,
    pub pair: usize,
    pub connected: bool,
    pub knn_sp: f64,
    pub eps_sp: f64,
    pub ratio: f64,
}

impl Tabular for SuperadditiveRow {
    fn columns() -> &'static [&'static str] {
        &["n", "k", "eps", "trial", "pair", "connected", "knn_sp", "eps_sp", "ratio"]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.k.to_string(),
            fmt_f(self.eps),
            self.trial.to_string(),
            self.pair.to_string(),
            self.connected.to_string(),
            fmt_f(self.knn_sp),
            fmt_f(self.eps_sp),
            fmt_f(self.ratio),
        ]
    }
}

/// Superadditive `h`: shortest paths on a kNN graph versus an epsilon
/// graph on the same sample. No limit is known, so only ratios are reported.
pub fn run_superadditive_probe(config: &ExperimentConfig) -> Result<Vec<SuperadditiveRow>> {
    let model = config.density.model()?;
    let scheme = config.scheme()?;
    let d = model.dim();
    if matches!(scheme, WeightScheme::CorollaryF { .. } | WeightScheme::Unit) {
        return Err(Error::InvalidArgument(format!("scheme `{}` is not an h-weight", config.scheme)));
    }
    let h = |t: f64| scheme.weight_for_length(t, d).unwrap_or(f64::NAN);
    let diameter = model.domain().diameter();
    check_superadditive(&h, diameter / 2.0, 10_000, config.seed)?;
    check_increasing(&h, diameter * 1e-6, diameter, 1000)?;

    let pairs = config.pairs.resolve(model.domain(), pair_seed(config.seed))?;
    let rows = over_trials(config, |n, trial| {
        let k = config.k.k_for(n);
        let eps = config.eps.eps_for(n, d);
        let points = model.sample(n, trial_seed(config.seed, n, trial))?;
        let knn = GeometricGraph::build_knn(&points, k, &scheme)?;
        let epsg = GeometricGraph::build_eps(&points, eps, &scheme)?;
        let snapped = snap_pairs(&points, &pairs)?;
        let a = pair_paths(&knn, &snapped)?;
        let b = pair_paths(&epsg, &snapped)?;
        Ok(a.iter()
            .zip(&b)
            .enumerate()
            .map(|(pair, ((la, _), (lb, _)))| {
                let connected = la.is_finite() && lb.is_finite();
                SuperadditiveRow {
                    n,
                    k,
                    eps,
                    trial,
                    pair,
                    connected,
                    knn_sp: *la,
                    eps_sp: *lb,
                    ratio: if connected { la / lb } else { f64::NAN },
                }
            })
            .collect())
    })?;
    let mut bad: Vec<(usize, usize)> = rows.iter().filter(|r| !r.connected).map(|r| (r.n, r.trial)).collect();
    bad.dedup();
    check_disconnected(bad.len(), config.n.len() * config.trials, "superadditive probe")?;
    Ok(rows)
}
