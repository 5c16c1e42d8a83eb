//! Flat `key = value` experiment configuration.

use std::fmt;
use std::path::PathBuf;

use rand::Rng as _;
use sha2::{Digest, Sha256};

use crate::density::{DensityModel, Domain, GaussianBump, TwoSquares};
use crate::error::{Error, Result};
use crate::rng;
use crate::theory::{knn_schedule, unit_ball_volume};
use crate::weights::WeightScheme;

/// The experiment families exposed by the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Convergence,
    Weighted,
    WeightsCorollary,
    Isomap,
    Superadditive,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Convergence,
        Experiment::Weighted,
        Experiment::WeightsCorollary,
        Experiment::Isomap,
        Experiment::Superadditive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Convergence => "convergence",
            Experiment::Weighted => "weighted",
            Experiment::WeightsCorollary => "weights-corollary",
            Experiment::Isomap => "isomap",
            Experiment::Superadditive => "superadditive",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == name)
            .ok_or_else(|| Error::parse("config", format!("unknown experiment `{name}`")))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Density model named in a config.
///
/// Text form: `uniform`, `uniform:d=3`, `two-squares`, `gaussian-bump`,
/// optionally followed by `;`-separated overrides such as
/// `two-squares:ratio=8;side=0.25`.
#[derive(Debug, Clone, PartialEq)]
pub enum DensitySpec {
    Uniform { d: usize },
    TwoSquares(TwoSquares),
    GaussianBump(GaussianBump),
}

fn parse_num<T: std::str::FromStr>(what: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::parse("config", format!("bad value `{v}` for `{what}`")))
}

fn parse_point2(what: &str, v: &str) -> Result<[f64; 2]> {
    let xs: Vec<f64> = v.split_whitespace().map(|t| parse_num(what, t)).collect::<Result<_>>()?;
    <[f64; 2]>::try_from(xs).map_err(|_| Error::parse("config", format!("`{what}` needs two coordinates")))
}

impl DensitySpec {
    pub fn parse(text: &str) -> Result<Self> {
        let (head, rest) = text.trim().split_once(':').unwrap_or((text.trim(), ""));
        let mut spec = match head {
            "uniform" => DensitySpec::Uniform { d: 2 },
            "two-squares" => DensitySpec::TwoSquares(TwoSquares::default()),
            "gaussian-bump" => DensitySpec::GaussianBump(GaussianBump::default()),
            _ => return Err(Error::parse("config", format!("unknown density `{head}`"))),
        };
        for kv in rest.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::parse("config", format!("density override `{kv}` is not key=value")))?;
            let (k, v) = (k.trim(), v.trim());
            match (&mut spec, k) {
                (DensitySpec::Uniform { d }, "d") => *d = parse_num(k, v)?,
                (DensitySpec::TwoSquares(p), "ratio") => p.ratio = parse_num(k, v)?,
                (DensitySpec::TwoSquares(p), "side") => p.side = parse_num(k, v)?,
                (DensitySpec::TwoSquares(p), "ramp") => p.ramp = parse_num(k, v)?,
                (DensitySpec::TwoSquares(p), "center1") => p.centers[0] = parse_point2(k, v)?,
                (DensitySpec::TwoSquares(p), "center2") => p.centers[1] = parse_point2(k, v)?,
                (DensitySpec::GaussianBump(p), "sigma") => p.sigma = parse_num(k, v)?,
                (DensitySpec::GaussianBump(p), "peak") => p.peak_ratio = parse_num(k, v)?,
                (DensitySpec::GaussianBump(p), "center") => p.center = parse_point2(k, v)?,
                _ => return Err(Error::parse("config", format!("`{k}` is not a parameter of `{head}`"))),
            }
        }
        Ok(spec)
    }

    pub fn model(&self) -> Result<DensityModel> {
        match self {
            DensitySpec::Uniform { d } => {
                if *d == 0 {
                    return Err(Error::InvalidModel("dimension must be positive".into()));
                }
                Ok(DensityModel::uniform(Domain::unit(*d)))
            }
            DensitySpec::TwoSquares(p) => DensityModel::two_squares(p),
            DensitySpec::GaussianBump(p) => DensityModel::gaussian_bump(p),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DensitySpec::Uniform { d } => *d,
            _ => 2,
        }
    }
}

impl fmt::Display for DensitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensitySpec::Uniform { d } => write!(f, "uniform:d={d}"),
            DensitySpec::TwoSquares(p) => write!(
                f,
                "two-squares:ratio={};side={};ramp={};center1={} {};center2={} {}",
                p.ratio, p.side, p.ramp, p.centers[0][0], p.centers[0][1], p.centers[1][0], p.centers[1][1]
            ),
            DensitySpec::GaussianBump(p) => write!(
                f,
                "gaussian-bump:sigma={};peak={};center={} {}",
                p.sigma, p.peak_ratio, p.center[0], p.center[1]
            ),
        }
    }
}

/// Neighbor count per sample size: fixed, or `round(ln(n)^(1 + alpha))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KRule {
    Fixed(usize),
    Schedule { alpha: f64 },
}

impl KRule {
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if let Some(a) = t.strip_prefix("schedule:") {
            return Ok(KRule::Schedule { alpha: parse_num("k", a)? });
        }
        if t == "schedule" {
            return Ok(KRule::Schedule { alpha: 0.5 });
        }
        let k: usize = parse_num("k", t)?;
        if k == 0 {
            return Err(Error::parse("config", "k must be positive"));
        }
        Ok(KRule::Fixed(k))
    }

    pub fn k_for(&self, n: usize) -> usize {
        match *self {
            KRule::Fixed(k) => k,
            KRule::Schedule { alpha } => knn_schedule(n, alpha),
        }
    }
}

impl fmt::Display for KRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KRule::Fixed(k) => write!(f, "{k}"),
            KRule::Schedule { alpha } => write!(f, "schedule:{alpha}"),
        }
    }
}

/// Radius of epsilon graphs: fixed, or `2 (ln n / (n eta_d))^(1/d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsRule {
    Fixed(f64),
    Auto,
}

impl EpsRule {
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "auto" => Ok(EpsRule::Auto),
            t => {
                let e: f64 = parse_num("eps", t)?;
                if !(e > 0.0) {
                    return Err(Error::parse("config", "eps must be positive"));
                }
                Ok(EpsRule::Fixed(e))
            }
        }
    }

    pub fn eps_for(&self, n: usize, d: usize) -> f64 {
        match *self {
            EpsRule::Fixed(e) => e,
            EpsRule::Auto => default_eps(n, d),
        }
    }
}

impl fmt::Display for EpsRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsRule::Fixed(e) => write!(f, "{e}"),
            EpsRule::Auto => f.write_str("auto"),
        }
    }
}

/// `2 (ln n / (n eta_d))^(1/d)`.
pub fn default_eps(n: usize, d: usize) -> f64 {
    2.0 * ((n as f64).ln() / (n as f64 * unit_ball_volume(d))).powf(1.0 / d as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Knn,
    Eps,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphKind::Knn => "knn",
            GraphKind::Eps => "eps",
        })
    }
}

/// Query pairs. Text forms:
/// `fixed:x1 y1 x2 y2,x1 y1 x2 y2` (one comma-separated entry per pair)
/// or `random:count=200;margin=0.15;min_sep=0.2`.
#[derive(Debug, Clone, PartialEq)]
pub enum PairSpec {
    Fixed(Vec<(Vec<f64>, Vec<f64>)>),
    Random { count: usize, margin: f64, min_sep: f64 },
}

impl PairSpec {
    pub fn parse(text: &str, d: usize) -> Result<Self> {
        let t = text.trim();
        if let Some(body) = t.strip_prefix("fixed:") {
            let mut pairs = Vec::new();
            for entry in body.split(',') {
                let xs: Vec<f64> = entry.split_whitespace().map(|v| parse_num("pairs", v)).collect::<Result<_>>()?;
                if xs.len() != 2 * d {
                    return Err(Error::parse("config", format!("pair `{entry}` needs {} coordinates", 2 * d)));
                }
                pairs.push((xs[..d].to_vec(), xs[d..].to_vec()));
            }
            return Ok(PairSpec::Fixed(pairs));
        }
        if let Some(body) = t.strip_prefix("random:") {
            let (mut count, mut margin, mut min_sep) = (20, 0.15, 0.2);
            for kv in body.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                match kv.split_once('=') {
                    Some(("count", v)) => count = parse_num("count", v)?,
                    Some(("margin", v)) => margin = parse_num("margin", v)?,
                    Some(("min_sep", v)) => min_sep = parse_num("min_sep", v)?,
                    _ => return Err(Error::parse("config", format!("bad random pair option `{kv}`"))),
                }
            }
            if count == 0 || !(0.0..0.5).contains(&margin) {
                return Err(Error::parse("config", "random pairs need count >= 1 and margin in [0, 1/2)"));
            }
            return Ok(PairSpec::Random { count, margin, min_sep });
        }
        Err(Error::parse("config", format!("pairs must start with `fixed:` or `random:`, got `{t}`")))
    }

    /// Concrete pairs inside `domain`. Random pairs depend only on `seed`.
    pub fn resolve(&self, domain: &Domain, seed: u64) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
        match self {
            PairSpec::Fixed(pairs) => {
                for (x, y) in pairs {
                    domain.check(x)?;
                    domain.check(y)?;
                }
                Ok(pairs.clone())
            }
            PairSpec::Random { count, margin, min_sep } => {
                let d = domain.dim();
                let mut r = rng::rng(seed);
                let draw = |r: &mut rng::Rng| -> Vec<f64> {
                    (0..d)
                        .map(|a| {
                            let w = domain.extent(a);
                            domain.lower()[a] + w * (margin + (1.0 - 2.0 * margin) * r.random::<f64>())
                        })
                        .collect()
                };
                let mut out = Vec::with_capacity(*count);
                let mut attempts = 0usize;
                while out.len() < *count {
                    attempts += 1;
                    if attempts > 1000 * count {
                        return Err(Error::InvalidArgument(format!(
                            "cannot place pairs {min_sep} apart inside margin {margin}"
                        )));
                    }
                    let x = draw(&mut r);
                    let y = draw(&mut r);
                    if crate::spatial::dist2(&x, &y).sqrt() >= *min_sep {
                        out.push((x, y));
                    }
                }
                Ok(out)
            }
        }
    }
}

impl fmt::Display for PairSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairSpec::Fixed(pairs) => {
                let entries: Vec<String> = pairs
                    .iter()
                    .map(|(x, y)| x.iter().chain(y).map(|v| v.to_string()).collect::<Vec<_>>().join(" "))
                    .collect();
                write!(f, "fixed:{}", entries.join(","))
            }
            PairSpec::Random { count, margin, min_sep } => {
                write!(f, "random:count={count};margin={margin};min_sep={min_sep}")
            }
        }
    }
}

/// Where reference distances come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceMode {
    /// Closed form when the field is constant, lattice oracle otherwise.
    Auto,
    Lattice,
}

/// Sub-mode of the convergence experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceMode {
    /// Rescaled hop distance against `D_q`, with sandwich flags.
    Ratio,
    /// Unweighted versus Euclidean-weighted paths through a density bump.
    Detour,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub mode: ConvergenceMode,
    pub density: DensitySpec,
    pub n: Vec<usize>,
    pub k: KRule,
    pub eps: EpsRule,
    pub graph: GraphKind,
    pub scheme: String,
    pub pairs: PairSpec,
    pub oracle_m: usize,
    pub reference: ReferenceMode,
    pub trials: usize,
    pub seed: u64,
    pub lambda: f64,
    pub a: f64,
    pub dim: usize,
    pub control: bool,
    pub outdir: PathBuf,
}

/// Keys accepted in config files and as overrides.
pub const CONFIG_KEYS: [&str; 18] = [
    "experiment",
    "mode",
    "density",
    "n",
    "k",
    "eps",
    "graph",
    "scheme",
    "pairs",
    "oracle_m",
    "reference",
    "trials",
    "seed",
    "lambda",
    "a",
    "dim",
    "control",
    "outdir",
];

impl ExperimentConfig {
    /// Desk-scale defaults for each experiment.
    pub fn defaults(experiment: Experiment) -> Self {
        let base = Self {
            experiment,
            mode: ConvergenceMode::Ratio,
            density: DensitySpec::Uniform { d: 2 },
            n: vec![3000, 10_000, 30_000],
            k: KRule::Schedule { alpha: 0.5 },
            eps: EpsRule::Auto,
            graph: GraphKind::Knn,
            scheme: "unit".into(),
            pairs: PairSpec::Fixed(vec![(vec![0.25, 0.5], vec![0.75, 0.5])]),
            oracle_m: 512,
            reference: ReferenceMode::Auto,
            trials: 20,
            seed: 1,
            lambda: 0.1,
            a: 0.3,
            dim: 2,
            control: true,
            outdir: PathBuf::from("out"),
        };
        match experiment {
            Experiment::Convergence => base,
            Experiment::Weighted => Self {
                density: DensitySpec::TwoSquares(TwoSquares::default()),
                n: vec![20_000],
                scheme: "h-power:0.5".into(),
                pairs: PairSpec::Fixed(vec![(vec![0.1, 0.5], vec![0.9, 0.5]), (vec![0.2, 0.2], vec![0.8, 0.8])]),
                trials: 5,
                ..base
            },
            Experiment::WeightsCorollary => Self {
                n: vec![20_000],
                scheme: "corollary-f:identity".into(),
                pairs: PairSpec::Fixed(vec![(vec![0.2, 0.5], vec![0.8, 0.5]), (vec![0.2, 0.2], vec![0.8, 0.8])]),
                trials: 5,
                ..base
            },
            Experiment::Isomap => Self {
                density: DensitySpec::TwoSquares(TwoSquares::default()),
                n: vec![2000],
                k: KRule::Fixed(10),
                trials: 20,
                ..base
            },
            Experiment::Superadditive => Self {
                n: vec![10_000],
                scheme: "h-custom:square".into(),
                pairs: PairSpec::Fixed(vec![(vec![0.25, 0.5], vec![0.75, 0.5]), (vec![0.2, 0.2], vec![0.8, 0.8])]),
                trials: 5,
                ..base
            },
        }
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "experiment" => {
                let e = Experiment::from_name(v)?;
                if e != self.experiment {
                    return Err(Error::parse("config", format!("config is for `{e}`, not `{}`", self.experiment)));
                }
            }
            "mode" => {
                self.mode = match v {
                    "ratio" => ConvergenceMode::Ratio,
                    "detour" => ConvergenceMode::Detour,
                    _ => return Err(Error::parse("config", format!("unknown mode `{v}`"))),
                }
            }
            "density" => self.density = DensitySpec::parse(v)?,
            "n" => {
                self.n = v.split(',').map(|t| parse_num("n", t)).collect::<Result<_>>()?;
                if self.n.iter().any(|&n| n < 3) {
                    return Err(Error::parse("config", "every n must be at least 3"));
                }
            }
            "k" => self.k = KRule::parse(v)?,
            "eps" => self.eps = EpsRule::parse(v)?,
            "graph" => {
                self.graph = match v {
                    "knn" => GraphKind::Knn,
                    "eps" => GraphKind::Eps,
                    _ => return Err(Error::parse("config", format!("graph must be knn or eps, got `{v}`"))),
                }
            }
            "scheme" => {
                WeightScheme::parse(v)?;
                self.scheme = v.to_string();
            }
            "pairs" => self.pairs = PairSpec::parse(v, self.density.dim())?,
            "oracle_m" => self.oracle_m = parse_num(key, v)?,
            "reference" => {
                self.reference = match v {
                    "auto" => ReferenceMode::Auto,
                    "lattice" => ReferenceMode::Lattice,
                    _ => return Err(Error::parse("config", format!("reference must be auto or lattice, got `{v}`"))),
                }
            }
            "trials" => self.trials = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "lambda" => self.lambda = parse_num(key, v)?,
            "a" => self.a = parse_num(key, v)?,
            "dim" => self.dim = parse_num(key, v)?,
            "control" => self.control = parse_num(key, v)?,
            "outdir" => self.outdir = PathBuf::from(v),
            _ => return Err(Error::parse("config", format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Defaults for `experiment` overridden by `settings` in order.
    pub fn from_settings(experiment: Experiment, settings: &[(String, String)]) -> Result<Self> {
        let mut cfg = Self::defaults(experiment);
        // Density first so that pair coordinates are parsed in the right dimension.
        for (k, v) in settings.iter().filter(|(k, _)| k == "density") {
            cfg.set(k, v)?;
        }
        for (k, v) in settings.iter().filter(|(k, _)| k != "density") {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty() || self.trials == 0 {
            return Err(Error::parse("config", "need at least one n and one trial"));
        }
        if self.dim == 0 {
            return Err(Error::parse("config", "dim must be positive"));
        }
        if let PairSpec::Fixed(p) = &self.pairs {
            if p.iter().any(|(x, y)| x.len() != self.density.dim() || y.len() != self.density.dim()) {
                return Err(Error::parse("config", "pair dimension does not match the density"));
            }
        }
        self.density.model()?;
        Ok(())
    }

    pub fn scheme(&self) -> Result<WeightScheme> {
        WeightScheme::parse(&self.scheme)
    }

    /// Canonical text form; parsing it back yields the same config.
    pub fn to_text(&self) -> String {
        let n: Vec<String> = self.n.iter().map(|v| v.to_string()).collect();
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        line("experiment", self.experiment.to_string());
        line(
            "mode",
            match self.mode {
                ConvergenceMode::Ratio => "ratio".into(),
                ConvergenceMode::Detour => "detour".into(),
            },
        );
        line("density", self.density.to_string());
        line("n", n.join(","));
        line("k", self.k.to_string());
        line("eps", self.eps.to_string());
        line("graph", self.graph.to_string());
        line("scheme", self.scheme.clone());
        line("pairs", self.pairs.to_string());
        line("oracle_m", self.oracle_m.to_string());
        line(
            "reference",
            match self.reference {
                ReferenceMode::Auto => "auto".into(),
                ReferenceMode::Lattice => "lattice".into(),
            },
        );
        line("trials", self.trials.to_string());
        line("seed", self.seed.to_string());
        line("lambda", self.lambda.to_string());
        line("a", self.a.to_string());
        line("dim", self.dim.to_string());
        line("control", self.control.to_string());
        line("outdir", self.outdir.display().to_string());
        s
    }

    /// SHA-256 of the canonical text, excluding the output directory.
    pub fn hash(&self) -> String {
        let text: String = self.to_text().lines().filter(|l| !l.starts_with("outdir")).collect::<Vec<_>>().join("\n");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Parses flat `key = value` text. Blank lines and `#` comments are ignored.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split_once('#').map_or(raw, |(a, _)| a).trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse("config", format!("line {}: expected `key = value`", lineno + 1)))?;
        let k = k.trim();
        if !CONFIG_KEYS.contains(&k) {
            return Err(Error::parse("config", format!("line {}: unknown key `{k}`", lineno + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        for e in Experiment::ALL {
            let cfg = ExperimentConfig::defaults(e);
            let parsed = ExperimentConfig::from_settings(e, &parse_config_text(&cfg.to_text()).unwrap()).unwrap();
            assert_eq!(parsed, cfg);
            assert_eq!(parsed.hash(), cfg.hash());
        }
    }

    #[test]
    fn overrides_and_errors() {
        let s = parse_config_text("k = 31 # comment\nn = 1000, 2000\n\npairs = random:count=5;margin=0.2").unwrap();
        let cfg = ExperimentConfig::from_settings(Experiment::Convergence, &s).unwrap();
        assert_eq!(cfg.k, KRule::Fixed(31));
        assert_eq!(cfg.n, vec![1000, 2000]);
        assert!(parse_config_text("bogus = 1").is_err());
        assert!(parse_config_text("no equals sign").is_err());
        let bad = vec![("k".to_string(), "zero".to_string())];
        assert!(ExperimentConfig::from_settings(Experiment::Convergence, &bad).is_err());
        let wrong = vec![("experiment".to_string(), "isomap".to_string())];
        assert!(ExperimentConfig::from_settings(Experiment::Convergence, &wrong).is_err());
    }

    #[test]
    fn density_specs() {
        let s = DensitySpec::parse("two-squares:ratio=8;side=0.25").unwrap();
        assert_eq!(DensitySpec::parse(&s.to_string()).unwrap(), s);
        assert_eq!(DensitySpec::parse("uniform:d=3").unwrap().dim(), 3);
        assert!(DensitySpec::parse("gaussian-bump:ratio=2").is_err());
        assert!(DensitySpec::parse("nope").is_err());
    }

    #[test]
    fn random_pairs_are_seeded_and_separated() {
        let spec = PairSpec::parse("random:count=50;margin=0.15;min_sep=0.2", 2).unwrap();
        let a = spec.resolve(&Domain::unit(2), 3).unwrap();
        assert_eq!(a, spec.resolve(&Domain::unit(2), 3).unwrap());
        for (x, y) in &a {
            assert!(crate::spatial::dist2(x, y).sqrt() >= 0.2);
            assert!(x.iter().chain(y).all(|&v| (0.15..=0.85).contains(&v)));
        }
    }

    #[test]
    fn schedules() {
        assert_eq!(KRule::parse("schedule:0.5").unwrap().k_for(10_000), 28);
        assert!(
            (default_eps(20_000, 2) - 2.0 * ((20_000f64).ln() / (20_000.0 * std::f64::consts::PI)).sqrt()).abs()
                < 1e-15
        );
    }
}
