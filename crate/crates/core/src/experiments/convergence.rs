//! Unweighted kNN shortest paths against `D_q`.

use rayon::prelude::*;

use super::report::{render_svg, SvgPath, Tabular};
use super::{
    check_disconnected, fmt_f, over_trials, pair_paths, pair_seed, path_arc_length, path_mean_density, q_reference,
    snap_pairs, svg_path, trial_seed, ExperimentConfig, Reference,
};
use crate::density::{DensityModel, SampleSet};
use crate::error::Result;
use crate::shortest_path::sp_distance;
use crate::theory::{rescale_factor, sandwich_constants};
use crate::weights::WeightScheme;
use crate::GeometricGraph;

/// Points drawn in figures; samples are i.i.d., so a prefix is a fair subsample.
const FIGURE_POINTS: usize = 5000;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub k: usize,
    pub trial: usize,
    pub pair: usize,
    pub snap: f64,
    pub connected: bool,
    /// Hop count; infinite when disconnected.
    pub hops: f64,
    pub rescaled_sp: f64,
    pub oracle: f64,
    /// NaN when disconnected.
    pub ratio: f64,
    /// NaN when the parameters violate dense sampling.
    pub e1: f64,
    pub e2: f64,
    /// `e1 D_q <= e2 D_sp`.
    pub sandwich_lower: bool,
    /// `e2 D_sp <= D_q - e2`.
    pub sandwich_upper: bool,
}

impl ConvergenceRow {
    pub fn sandwich(&self) -> bool {
        self.sandwich_lower && self.sandwich_upper
    }
}

impl Tabular for ConvergenceRow {
    fn columns() -> &'static [&'static str] {
        &[
            "n",
            "k",
            "trial",
            "pair",
            "snap",
            "connected",
            "hops",
            "rescaled_sp",
            "oracle",
            "ratio",
            "e1",
            "e2",
            "sandwich_lower",
            "sandwich_upper",
            "sandwich",
        ]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.k.to_string(),
            self.trial.to_string(),
            self.pair.to_string(),
            fmt_f(self.snap),
            self.connected.to_string(),
            fmt_f(self.hops),
            fmt_f(self.rescaled_sp),
            fmt_f(self.oracle),
            fmt_f(self.ratio),
            fmt_f(self.e1),
            fmt_f(self.e2),
            self.sandwich_lower.to_string(),
            self.sandwich_upper.to_string(),
            self.sandwich().to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetourRow {
    pub n: usize,
    pub k: usize,
    pub trial: usize,
    pub pair: usize,
    pub connected: bool,
    pub unweighted_density: f64,
    pub euclidean_density: f64,
    pub unweighted_arc: f64,
    pub euclidean_arc: f64,
}

impl DetourRow {
    pub fn lower_density(&self) -> bool {
        self.unweighted_density < self.euclidean_density
    }

    pub fn longer_arc(&self) -> bool {
        self.unweighted_arc >= self.euclidean_arc
    }
}

impl Tabular for DetourRow {
    fn columns() -> &'static [&'static str] {
        &[
            "n",
            "k",
            "trial",
            "pair",
            "connected",
            "unweighted_density",
            "euclidean_density",
            "unweighted_arc",
            "euclidean_arc",
            "lower_density",
            "longer_arc",
        ]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.k.to_string(),
            self.trial.to_string(),
            self.pair.to_string(),
            self.connected.to_string(),
            fmt_f(self.unweighted_density),
            fmt_f(self.euclidean_density),
            fmt_f(self.unweighted_arc),
            fmt_f(self.euclidean_arc),
            self.lower_density().to_string(),
            self.longer_arc().to_string(),
        ]
    }
}

pub(crate) fn figure_points(points: &SampleSet) -> Vec<([f64; 2], &'static str)> {
    points.iter().take(FIGURE_POINTS).map(|p| ([p[0], p[1]], "pt")).collect()
}

/// For every `n`, trial and pair: rescaled hop distance on the unweighted
/// kNN graph, reference `D_q`, their ratio and the sandwich flags.
pub fn run_convergence_unweighted(config: &ExperimentConfig) -> Result<Vec<ConvergenceRow>> {
    Ok(run_convergence_with_figure(config)?.0)
}

pub(crate) fn run_convergence_with_figure(config: &ExperimentConfig) -> Result<(Vec<ConvergenceRow>, Option<String>)> {
    let model = config.density.model()?;
    let d = model.dim();
    let pairs = config.pairs.resolve(model.domain(), pair_seed(config.seed))?;
    let reference = q_reference(&model, config)?;

    let rows = over_trials(config, |n, trial| {
        let k = config.k.k_for(n);
        let points = model.sample(n, trial_seed(config.seed, n, trial))?;
        let g = GeometricGraph::build_knn(&points, k, &WeightScheme::Unit)?;
        let snapped = snap_pairs(&points, &pairs)?;
        let scale = rescale_factor(n, k, d);
        let (e1, e2) = match sandwich_constants(n, k, d, config.lambda, config.a) {
            Ok((e1, e2, _)) => (e1, e2),
            Err(_) => (f64::NAN, f64::NAN),
        };
        snapped
            .par_iter()
            .enumerate()
            .map(|(pair, p)| {
                let hops = sp_distance(&g, p.source, p.target)?.length;
                let dq = reference.distance(points.point(p.source), points.point(p.target))?;
                let connected = hops.is_finite();
                let rescaled = hops * scale;
                Ok(ConvergenceRow {
                    n,
                    k,
                    trial,
                    pair,
                    snap: p.snap,
                    connected,
                    hops,
                    rescaled_sp: rescaled,
                    oracle: dq,
                    ratio: if connected { rescaled / dq } else { f64::NAN },
                    e1,
                    e2,
                    sandwich_lower: connected && e1 * dq <= e2 * hops,
                    sandwich_upper: connected && e2 * hops <= dq - e2,
                })
            })
            .collect()
    })?;

    let disconnected = count_bad_trials(rows.iter().map(|r| (r.n, r.trial, r.connected)));
    check_disconnected(disconnected, config.n.len() * config.trials, "unweighted kNN")?;

    let figure = first_trial_figure(config, &model, &pairs, &reference)?;
    Ok((rows, figure))
}

fn count_bad_trials(rows: impl Iterator<Item = (usize, usize, bool)>) -> usize {
    let mut bad: Vec<(usize, usize)> = rows.filter(|r| !r.2).map(|r| (r.0, r.1)).collect();
    bad.dedup();
    bad.len()
}

/// Unweighted SP paths of trial 0 at the first `n`, with lattice
/// geodesics when the reference is a lattice.
fn first_trial_figure(
    config: &ExperimentConfig,
    model: &DensityModel,
    pairs: &[(Vec<f64>, Vec<f64>)],
    reference: &Reference,
) -> Result<Option<String>> {
    if model.dim() != 2 {
        return Ok(None);
    }
    let n = config.n[0];
    let points = model.sample(n, trial_seed(config.seed, n, 0))?;
    let g = GeometricGraph::build_knn(&points, config.k.k_for(n), &WeightScheme::Unit)?;
    let snapped = snap_pairs(&points, pairs)?;
    let mut paths: Vec<SvgPath> = Vec::new();
    for (p, (_, path)) in snapped.iter().zip(pair_paths(&g, &snapped)?) {
        paths.push(svg_path(&points, &path, "unweighted"));
        if let Reference::Lattice(o) = reference {
            let geo = o.geodesic(points.point(p.source), points.point(p.target))?;
            paths.push(SvgPath { class: "oracle".into(), points: geo.points.iter().map(|q| [q[0], q[1]]).collect() });
        }
    }
    Ok(Some(render_svg(model.domain(), Some(model), &figure_points(&points), &paths)))
}

/// Unweighted versus Euclidean-weighted shortest paths on the same kNN
/// graph: mean vertex density and Euclidean arc length of each path.
pub fn run_detour_probe(config: &ExperimentConfig) -> Result<Vec<DetourRow>> {
    Ok(run_detour_with_figure(config)?.0)
}

pub(crate) fn run_detour_with_figure(config: &ExperimentConfig) -> Result<(Vec<DetourRow>, Option<String>)> {
    let model = config.density.model()?;
    let pairs = config.pairs.resolve(model.domain(), pair_seed(config.seed))?;
    let rows = over_trials(config, |n, trial| {
        let k = config.k.k_for(n);
        let points = model.sample(n, trial_seed(config.seed, n, trial))?;
        let unit = GeometricGraph::build_knn(&points, k, &WeightScheme::Unit)?;
        let eucl = GeometricGraph::build_knn(&points, k, &WeightScheme::Euclidean)?;
        let snapped = snap_pairs(&points, &pairs)?;
        let up = pair_paths(&unit, &snapped)?;
        let ep = pair_paths(&eucl, &snapped)?;
        Ok(up
            .iter()
            .zip(&ep)
            .enumerate()
            .map(|(pair, ((ul, upath), (_, epath)))| {
                let connected = ul.is_finite();
                let stat = |path: &[usize], f: &dyn Fn(&[usize]) -> f64| if connected { f(path) } else { f64::NAN };
                let dens = |p: &[usize]| path_mean_density(&model, &points, p);
                let arc = |p: &[usize]| path_arc_length(&points, p);
                DetourRow {
                    n,
                    k,
                    trial,
                    pair,
                    connected,
                    unweighted_density: stat(upath, &dens),
                    euclidean_density: stat(epath, &dens),
                    unweighted_arc: stat(upath, &arc),
                    euclidean_arc: stat(epath, &arc),
                }
            })
            .collect())
    })?;
    let disconnected = count_bad_trials(rows.iter().map(|r| (r.n, r.trial, r.connected)));
    check_disconnected(disconnected, config.n.len() * config.trials, "detour probe")?;

    let figure = if model.dim() == 2 {
        let n = config.n[0];
        let k = config.k.k_for(n);
        let points = model.sample(n, trial_seed(config.seed, n, 0))?;
        let snapped = snap_pairs(&points, &pairs)?;
        let mut paths = Vec::new();
        for (scheme, class) in [(WeightScheme::Unit, "unweighted"), (WeightScheme::Euclidean, "euclidean")] {
            let g = GeometricGraph::build_knn(&points, k, &scheme)?;
            for (_, path) in pair_paths(&g, &snapped)? {
                paths.push(svg_path(&points, &path, class));
            }
        }
        Some(render_svg(model.domain(), Some(&model), &figure_points(&points), &paths))
    } else {
        None
    };
    Ok((rows, figure))
}
