//! Seeded experiment runners.
//!
//! Every runner is a pure function of its [`ExperimentConfig`]: each
//! `(n, trial)` unit draws its sample from a seed derived from the config
//! seed, units run in parallel, and rows come back ordered by
//! `(n, trial, pair)`.

pub mod config;
pub mod convergence;
pub mod isomap;
pub mod report;
pub mod weighted;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;

pub use config::{
    ConvergenceMode, DensitySpec, EpsRule, Experiment, ExperimentConfig, GraphKind, KRule, PairSpec, ReferenceMode,
};
pub use convergence::{run_convergence_unweighted, run_detour_probe, ConvergenceRow, DetourRow};
pub use isomap::{classical_mds, run_isomap_demo, Embedding, IsomapRow, Pipeline};
pub use report::{emit_csv, emit_svg_paths, read_csv, SvgPath, Table, Tabular};
pub use weighted::{
    limit_field, run_superadditive_probe, run_weight_assignment, run_weighted_limit, CorollaryRow, SuperadditiveRow,
    WeightedRow,
};

use crate::density::{DensityKind, DensityModel, SampleSet};
use crate::error::{Error, Result};
use crate::oracle::{ContinuumOracle, Field};
use crate::rng::derive_seed;
use crate::shortest_path::sp_distance;
use crate::spatial::{dist2, SpatialIndex};
use crate::theory::TheoremConstants;
use crate::GeometricGraph;

/// Largest tolerated fraction of trials with a disconnected query pair.
pub const MAX_DISCONNECTED_FRACTION: f64 = 0.1;

/// Median of the finite values, NaN when there are none.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

pub(crate) fn trial_seed(seed: u64, n: usize, trial: usize) -> u64 {
    derive_seed(seed, &[n as u64, trial as u64])
}

/// Seed used for random query pairs; independent of `n` and trial.
pub(crate) fn pair_seed(seed: u64) -> u64 {
    derive_seed(seed, &[u64::MAX])
}

/// Runs `f` over every `(n, trial)` unit in parallel and concatenates the
/// results in `(n, trial)` order.
pub(crate) fn over_trials<T: Send>(
    config: &ExperimentConfig,
    f: impl Fn(usize, usize) -> Result<Vec<T>> + Sync,
) -> Result<Vec<T>> {
    let units: Vec<(usize, usize)> = config.n.iter().flat_map(|&n| (0..config.trials).map(move |t| (n, t))).collect();
    let parts: Vec<Vec<T>> = units.par_iter().map(|&(n, t)| f(n, t)).collect::<Result<_>>()?;
    Ok(parts.into_iter().flatten().collect())
}

/// Aborts when more than 10% of trials lost a query pair.
pub(crate) fn check_disconnected(disconnected_trials: usize, total_trials: usize, what: &str) -> Result<()> {
    if disconnected_trials as f64 > MAX_DISCONNECTED_FRACTION * total_trials as f64 {
        return Err(Error::ExperimentAborted(format!(
            "{disconnected_trials} of {total_trials} trials left a query pair disconnected ({what}); \
             increase k or eps, or move the pairs away from low-density regions"
        )));
    }
    Ok(())
}

/// A query pair snapped to sample vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnappedPair {
    pub source: usize,
    pub target: usize,
    /// Larger of the two snapping distances.
    pub snap: f64,
}

pub fn snap_pairs(points: &SampleSet, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<Vec<SnappedPair>> {
    let index = SpatialIndex::build(points)?;
    pairs
        .iter()
        .map(|(x, y)| {
            let a = index.knn(x, 1)?[0];
            let b = index.knn(y, 1)?[0];
            Ok(SnappedPair { source: a.id, target: b.id, snap: a.dist.max(b.dist) })
        })
        .collect()
}

/// Shortest path for each snapped pair: length, vertex path.
pub(crate) fn pair_paths(g: &GeometricGraph, pairs: &[SnappedPair]) -> Result<Vec<(f64, Vec<usize>)>> {
    pairs.iter().map(|p| sp_distance(g, p.source, p.target).map(|r| (r.length, r.path))).collect()
}

/// Ground-truth f-distances: closed form for constant fields, lattice
/// oracle otherwise.
#[derive(Clone)]
pub enum Reference {
    /// `D_f(x, y) = c |x - y|`.
    Exact(f64),
    Lattice(Arc<ContinuumOracle>),
}

impl Reference {
    /// `constant` is the field value when the field is known to be constant.
    pub fn new(model: &DensityModel, field: Field, constant: Option<f64>, config: &ExperimentConfig) -> Result<Self> {
        match (config.reference, constant) {
            (ReferenceMode::Auto, Some(c)) => Ok(Reference::Exact(c)),
            _ => Ok(Reference::Lattice(Arc::new(ContinuumOracle::from_field(
                model.domain().clone(),
                config.oracle_m,
                field,
            )?))),
        }
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        match self {
            Reference::Exact(c) => Ok(c * dist2(x, y).sqrt()),
            Reference::Lattice(o) => o.f_distance(x, y),
        }
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self, Reference::Lattice(_))
    }
}

/// `D_q` reference for a model.
pub fn q_reference(model: &DensityModel, config: &ExperimentConfig) -> Result<Reference> {
    let constant = (model.kind() == DensityKind::Uniform).then(|| model.q_unchecked(model.domain().lower()));
    let m = model.clone();
    Reference::new(model, Arc::new(move |x: &[f64]| m.q_unchecked(x)), constant, config)
}

/// Mean density over the vertices of a path.
pub fn path_mean_density(model: &DensityModel, points: &SampleSet, path: &[usize]) -> f64 {
    path.iter().map(|&v| model.density_unchecked(points.point(v))).sum::<f64>() / path.len() as f64
}

/// Euclidean length of a vertex path.
pub fn path_arc_length(points: &SampleSet, path: &[usize]) -> f64 {
    path.windows(2).map(|w| dist2(points.point(w[0]), points.point(w[1])).sqrt()).sum()
}

pub(crate) fn svg_path(points: &SampleSet, path: &[usize], class: &str) -> SvgPath {
    SvgPath { class: class.into(), points: path.iter().map(|&v| [points.point(v)[0], points.point(v)[1]]).collect() }
}

pub(crate) fn fmt_f(x: f64) -> String {
    if x.is_finite() {
        x.to_string()
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub table: Table,
    pub constants: String,
    pub figure: Option<String>,
    /// Warnings and diagnostics worth surfacing to the user.
    pub notes: Vec<String>,
}

/// Theorem constants for every `n` of the config, with the model's
/// admissibility bound on `lambda`.
pub fn constants_report(config: &ExperimentConfig) -> Result<String> {
    let model = config.density.model()?;
    let (l, p_min, _) = model.lipschitz_constants();
    let mut s = String::new();
    for &n in &config.n {
        let k = config.k.k_for(n).min(n - 1);
        let _ = writeln!(s, "[n = {n}]");
        match TheoremConstants::evaluate(n, k, model.dim(), config.lambda, config.a) {
            Ok(c) => {
                let _ = writeln!(s, "{}", c.with_density(l, p_min));
            }
            Err(e) => {
                let _ = writeln!(s, "unavailable: {e}");
            }
        }
        let _ = writeln!(s);
    }
    Ok(s)
}

/// Metadata block written at the top of every CSV.
pub fn csv_metadata(config: &ExperimentConfig) -> Vec<(String, String)> {
    vec![
        ("experiment".into(), config.experiment.to_string()),
        ("seed".into(), config.seed.to_string()),
        ("config_hash".into(), config.hash()),
        ("density".into(), config.density.to_string()),
        ("tolerances".into(), "empirical desk-scale choices; the limit theorems give no finite-n rate".into()),
    ]
}

/// Runs the experiment named in the config.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let constants = constants_report(config)?;
    let (table, figure, notes) = match config.experiment {
        Experiment::Convergence => match config.mode {
            ConvergenceMode::Ratio => {
                let (rows, fig) = convergence::run_convergence_with_figure(config)?;
                (Table::from_rows(&rows), fig, Vec::new())
            }
            ConvergenceMode::Detour => {
                let (rows, fig) = convergence::run_detour_with_figure(config)?;
                (Table::from_rows(&rows), fig, Vec::new())
            }
        },
        Experiment::Weighted => {
            let (rows, fig) = weighted::run_weighted_with_figure(config)?;
            (Table::from_rows(&rows), fig, Vec::new())
        }
        Experiment::WeightsCorollary => {
            let (rows, fig) = weighted::run_corollary_with_figure(config)?;
            (Table::from_rows(&rows), fig, Vec::new())
        }
        Experiment::Isomap => {
            let out = isomap::run_isomap_demo(config)?;
            (Table::from_rows(&out.rows), out.figure, out.warnings)
        }
        Experiment::Superadditive => {
            let rows = run_superadditive_probe(config)?;
            (Table::from_rows(&rows), None, Vec::new())
        }
    };
    Ok(RunOutput { table, constants, figure, notes })
}

/// Writes `rows.csv`, `constants.txt` and, when present, `figure.svg` into
/// a fresh `<outdir>/<experiment>/<timestamp>` directory.
pub fn write_run(config: &ExperimentConfig, output: &RunOutput) -> Result<PathBuf> {
    let dir = report::run_directory(&config.outdir, config.experiment.name())?;
    emit_csv(&output.table, &csv_metadata(config), &dir.join("rows.csv"))?;
    let constants = format!("{}\n{}", config.to_text(), output.constants);
    let path = dir.join("constants.txt");
    std::fs::write(&path, constants).map_err(|e| Error::io(&path, e))?;
    if let Some(svg) = &output.figure {
        let path = dir.join("figure.svg");
        std::fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
    }
    Ok(dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_ignores_non_finite() {
        assert_eq!(median(&[3.0, 1.0, f64::NAN, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[f64::INFINITY]).is_nan());
    }

    #[test]
    fn abort_threshold() {
        assert!(check_disconnected(2, 20, "x").is_ok());
        assert!(matches!(check_disconnected(3, 20, "x"), Err(Error::ExperimentAborted(_))));
    }

    #[test]
    fn snapping_picks_nearest_vertices() {
        let pts = SampleSet::from_points(&[[0.1, 0.1], [0.9, 0.9], [0.5, 0.5]]).unwrap();
        let s = snap_pairs(&pts, &[(vec![0.12, 0.1], vec![0.6, 0.5])]).unwrap();
        assert_eq!((s[0].source, s[0].target), (0, 2));
        assert!((s[0].snap - 0.1).abs() < 1e-12);
    }
}
