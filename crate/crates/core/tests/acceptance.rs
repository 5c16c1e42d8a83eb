//! End-to-end acceptance checks at their stated tolerances. Each test
//! prints one PASS/FAIL line before asserting.

mod common;

use std::sync::Mutex;
use std::time::Instant;

use knnsp::experiments::{
    median, run_convergence_unweighted, run_detour_probe, run_isomap_demo, run_weight_assignment, run_weighted_limit,
    ConvergenceMode, DensitySpec, EpsRule, Experiment, ExperimentConfig, GraphKind, KRule, PairSpec, Pipeline,
    ReferenceMode,
};
use knnsp::oracle::ContinuumOracle;
use knnsp::theory::knn_schedule;
use knnsp::{Domain, GaussianBump, TwoSquares};
use rand::Rng;

// Pinned tolerances.
const ORACLE_REL_TOL: f64 = 0.015;
const ORACLE_MAX_SECONDS: f64 = 10.0;
const CONVERGENCE_BAND: (f64, f64) = (0.85, 1.02);
const CONVERGENCE_MAX_SECONDS: f64 = 300.0;
const SANDWICH_MIN_FRACTION: f64 = 0.95;
const DETOUR_MIN_FRACTION: f64 = 0.90;
const SQRT_WEIGHT_BAND: (f64, f64) = (0.8, 1.2);
const EPS_IDENTITY_BAND: (f64, f64) = (0.95, 1.05);
const COROLLARY_BAND: (f64, f64) = (0.85, 1.15);
const ISOMAP_MIN_FRACTION: f64 = 0.90;
const ISOMAP_CONTROL_TOL: f64 = 0.15;
const ISOMAP_MAX_SECONDS_PER_SEED: f64 = 120.0;

// Timed criteria run one at a time.
static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(name: &str, pass: bool, detail: &str) {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name} failed: {detail}");
}

fn within(x: f64, band: (f64, f64)) -> bool {
    x >= band.0 && x <= band.1
}

#[test]
fn oracle_fidelity_unit_field() {
    let _guard = serial();
    let start = Instant::now();
    let oracle = ContinuumOracle::build(Domain::unit(2), 512, |_| 1.0).unwrap();
    let mut rng = knnsp::rng::rng(2024);
    let pairs: Vec<([f64; 2], [f64; 2])> =
        (0..50).map(|_| ([rng.random(), rng.random()], [rng.random(), rng.random()])).collect();
    let dists =
        oracle.f_distances_pairs(&pairs.iter().map(|(x, y)| (x.to_vec(), y.to_vec())).collect::<Vec<_>>()).unwrap();
    let worst = pairs
        .iter()
        .zip(&dists)
        .map(|((x, y), d)| {
            let e = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
            (d - e).abs() / e
        })
        .fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    report(
        "oracle_fidelity_unit_field",
        worst <= ORACLE_REL_TOL && secs < ORACLE_MAX_SECONDS,
        &format!("max relative error {worst:.5} (tol {ORACLE_REL_TOL}), {secs:.1} s (limit {ORACLE_MAX_SECONDS} s)"),
    );
}

#[test]
fn unweighted_convergence_uniform() {
    let _guard = serial();
    let start = Instant::now();
    let mut cfg = ExperimentConfig::defaults(Experiment::Convergence);
    cfg.density = DensitySpec::Uniform { d: 2 };
    cfg.n = vec![3000, 30_000];
    cfg.k = KRule::Schedule { alpha: 0.5 };
    cfg.pairs = PairSpec::Fixed(vec![(vec![0.25, 0.5], vec![0.75, 0.5])]);
    cfg.trials = 20;
    cfg.seed = 11;
    let rows = run_convergence_unweighted(&cfg).unwrap();
    let med = |n: usize| median(&rows.iter().filter(|r| r.n == n).map(|r| r.ratio).collect::<Vec<_>>());
    let (small, large) = (med(3000), med(30_000));
    let secs = start.elapsed().as_secs_f64();
    let pass =
        within(large, CONVERGENCE_BAND) && (large - 1.0).abs() < (small - 1.0).abs() && secs < CONVERGENCE_MAX_SECONDS;
    report(
        "unweighted_convergence_uniform",
        pass,
        &format!(
            "k = {}, median ratio {large:.4} at n = 30000 (band {CONVERGENCE_BAND:?}), {small:.4} at n = 3000, {secs:.0} s",
            knn_schedule(30_000, 0.5)
        ),
    );
}

#[test]
fn sandwich_bounds() {
    let _guard = serial();
    let mut cfg = ExperimentConfig::defaults(Experiment::Convergence);
    cfg.density = DensitySpec::Uniform { d: 2 };
    cfg.n = vec![10_000];
    cfg.k = KRule::Fixed(100);
    cfg.lambda = 0.1;
    cfg.a = 0.3;
    cfg.pairs = PairSpec::Random { count: 200, margin: 0.15, min_sep: 0.2 };
    cfg.reference = ReferenceMode::Lattice;
    cfg.trials = 1;
    cfg.seed = 12;
    let rows = run_convergence_unweighted(&cfg).unwrap();
    let ok = rows.iter().filter(|r| r.sandwich()).count();
    let frac = ok as f64 / rows.len() as f64;
    report(
        "sandwich_bounds",
        rows.len() == 200 && frac >= SANDWICH_MIN_FRACTION,
        &format!("{ok} of {} pairs inside the sandwich (need {SANDWICH_MIN_FRACTION})", rows.len()),
    );
}

#[test]
fn low_density_detour() {
    let _guard = serial();
    let mut cfg = ExperimentConfig::defaults(Experiment::Convergence);
    cfg.mode = ConvergenceMode::Detour;
    cfg.density = DensitySpec::GaussianBump(GaussianBump::default());
    cfg.n = vec![5000];
    cfg.k = KRule::Fixed(15);
    cfg.pairs = PairSpec::Fixed(vec![(vec![0.2, 0.5], vec![0.8, 0.5])]);
    cfg.trials = 20;
    cfg.seed = 13;
    let rows = run_detour_probe(&cfg).unwrap();
    let ok = rows.iter().filter(|r| r.lower_density() && r.longer_arc()).count();
    let frac = ok as f64 / rows.len() as f64;
    report(
        "low_density_detour",
        frac >= DETOUR_MIN_FRACTION,
        &format!(
            "{ok} of {} seeds detour through lower density with longer arc (need {DETOUR_MIN_FRACTION})",
            rows.len()
        ),
    );
}

#[test]
fn weighted_limit() {
    let _guard = serial();
    let mut cfg = ExperimentConfig::defaults(Experiment::Weighted);
    cfg.density = DensitySpec::TwoSquares(TwoSquares::default());
    cfg.n = vec![20_000];
    cfg.k = KRule::Schedule { alpha: 0.5 };
    cfg.scheme = "h-power:0.5".into();
    cfg.trials = 5;
    cfg.seed = 14;
    let sqrt_rows = run_weighted_limit(&cfg).unwrap();
    let sqrt_med = median(&sqrt_rows.iter().map(|r| r.ratio).collect::<Vec<_>>());

    let mut eps = ExperimentConfig::defaults(Experiment::Weighted);
    eps.density = DensitySpec::Uniform { d: 2 };
    eps.graph = GraphKind::Eps;
    eps.eps = EpsRule::Auto;
    eps.scheme = "h-power:1".into();
    eps.n = vec![20_000];
    eps.trials = 5;
    eps.seed = 15;
    let eps_rows = run_weighted_limit(&eps).unwrap();
    let eps_med = median(&eps_rows.iter().map(|r| r.ratio).collect::<Vec<_>>());

    report(
        "weighted_limit",
        within(sqrt_med, SQRT_WEIGHT_BAND) && within(eps_med, EPS_IDENTITY_BAND),
        &format!(
            "sqrt weights median ratio {sqrt_med:.4} (band {SQRT_WEIGHT_BAND:?}); eps identity median {eps_med:.4} (band {EPS_IDENTITY_BAND:?})"
        ),
    );
}

#[test]
fn corollary_weights() {
    let _guard = serial();
    let mut cfg = ExperimentConfig::defaults(Experiment::WeightsCorollary);
    cfg.density = DensitySpec::Uniform { d: 2 };
    cfg.n = vec![20_000];
    cfg.k = KRule::Schedule { alpha: 0.5 };
    cfg.scheme = "corollary-f:identity".into();
    cfg.trials = 5;
    cfg.seed = 16;
    let rows = run_weight_assignment(&cfg).unwrap();
    let med = median(&rows.iter().map(|r| r.base.ratio).collect::<Vec<_>>());
    report(
        "corollary_weights",
        within(med, COROLLARY_BAND),
        &format!("median ratio {med:.4} (band {COROLLARY_BAND:?})"),
    );
}

#[test]
fn isomap_distortion() {
    let _guard = serial();
    let start = Instant::now();
    let mut cfg = ExperimentConfig::defaults(Experiment::Isomap);
    cfg.density = DensitySpec::TwoSquares(TwoSquares::default());
    cfg.n = vec![2000];
    cfg.k = KRule::Fixed(10);
    cfg.trials = 20;
    cfg.control = false;
    cfg.seed = 17;
    let out = run_isomap_demo(&cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let of = |p: Pipeline| out.rows.iter().filter(move |r| r.pipeline == p);
    let stretched = of(Pipeline::Unweighted).filter(|r| r.stretch_ratio() > 1.0).count();
    let balanced = of(Pipeline::Euclidean).filter(|r| (r.stretch_ratio() - 1.0).abs() <= ISOMAP_CONTROL_TOL).count();
    let seeds = cfg.trials as f64;
    let pass = stretched as f64 / seeds >= ISOMAP_MIN_FRACTION
        && balanced as f64 / seeds >= ISOMAP_MIN_FRACTION
        && secs / seeds < ISOMAP_MAX_SECONDS_PER_SEED;
    let med_u = median(&of(Pipeline::Unweighted).map(|r| r.stretch_ratio()).collect::<Vec<_>>());
    let med_e = median(&of(Pipeline::Euclidean).map(|r| r.stretch_ratio()).collect::<Vec<_>>());
    report(
        "isomap_distortion",
        pass,
        &format!(
            "high/low stretch > 1 in {stretched}/20 seeds (median {med_u:.3}); euclidean control within {ISOMAP_CONTROL_TOL} in {balanced}/20 (median {med_e:.3}); {:.1} s per seed",
            secs / seeds
        ),
    );
}

#[test]
fn property_suites() {
    let _guard = serial();
    let results = common::run_all_property_checks();
    let failed: Vec<&String> = results.iter().filter(|r| !r.1).map(|r| &r.0).collect();
    for (name, ok) in &results {
        println!("  {} {name}", if *ok { "ok" } else { "FAILED" });
    }
    report(
        "property_suites",
        failed.is_empty(),
        &format!("{} of {} property checks green", results.len() - failed.len(), results.len()),
    );
}
