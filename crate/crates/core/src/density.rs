//! Analytic densities on axis-aligned boxes and reproducible sampling.
//!
//! Every model is a positive background level plus a list of bump
//! components, normalized to unit mass. Plateau boxes use a linear ramp in
//! Chebyshev distance so the density stays Lipschitz; Gaussian bumps are
//! isotropic. All normalizers are closed-form.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng;

/// Axis-aligned box `[lower, upper]` in R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Domain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidModel(format!(
                "domain corners must be non-empty and of equal length ({} vs {})",
                lower.len(),
                upper.len()
            )));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l.is_finite() && u.is_finite() && l < u)) {
            return Err(Error::InvalidModel("domain must satisfy lower < upper on every axis".into()));
        }
        Ok(Self { lower, upper })
    }

    /// The unit cube `[0, 1]^d`.
    pub fn unit(d: usize) -> Self {
        assert!(d >= 1, "dimension must be positive");
        Self { lower: vec![0.0; d], upper: vec![1.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.extent(i)).product()
    }

    pub fn diameter(&self) -> f64 {
        (0..self.dim()).map(|i| self.extent(i).powi(2)).sum::<f64>().sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    /// Smallest distance from `x` to the boundary of the box.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (l, u))| (v - l).min(u - v))
            .fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        if !self.contains(x) {
            return Err(Error::DomainViolation { point: x.to_vec() });
        }
        Ok(())
    }
}

/// Which family a model was built from; recorded in experiment output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityKind {
    Uniform,
    TwoSquares,
    GaussianBump,
    Mixture,
}

impl fmt::Display for DensityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DensityKind::Uniform => "uniform",
            DensityKind::TwoSquares => "two-squares",
            DensityKind::GaussianBump => "gaussian-bump",
            DensityKind::Mixture => "custom-mixture",
        })
    }
}

/// Unnormalized bump added on top of the background level.
#[derive(Debug, Clone, PartialEq)]
pub enum Component {
    /// Cube of side `side` at `center` with value `height`, decaying linearly
    /// to zero over Chebyshev distance `ramp` outside the cube.
    RampedBox { center: Vec<f64>, side: f64, ramp: f64, height: f64 },
    /// `height * exp(-|x - center|^2 / (2 sigma^2))`.
    Gaussian { center: Vec<f64>, sigma: f64, height: f64 },
}

impl Component {
    fn center(&self) -> &[f64] {
        match self {
            Component::RampedBox { center, .. } | Component::Gaussian { center, .. } => center,
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Component::RampedBox { center, side, ramp, height } => {
                let cheb = x.iter().zip(center).map(|(a, c)| ((a - c).abs() - side / 2.0).max(0.0)).fold(0.0, f64::max);
                height * (1.0 - cheb / ramp).clamp(0.0, 1.0)
            }
            Component::Gaussian { center, sigma, height } => {
                let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c).powi(2)).sum();
                height * (-r2 / (2.0 * sigma * sigma)).exp()
            }
        }
    }

    /// True when `x` lies on the flat top of a ramped box.
    pub fn on_plateau(&self, x: &[f64]) -> bool {
        match self {
            Component::RampedBox { center, side, .. } => x.iter().zip(center).all(|(a, c)| (a - c).abs() <= side / 2.0),
            Component::Gaussian { .. } => false,
        }
    }

    /// True when the component is exactly zero at `x`.
    pub fn outside_support(&self, x: &[f64]) -> bool {
        match self {
            Component::RampedBox { center, side, ramp, .. } => {
                x.iter().zip(center).any(|(a, c)| (a - c).abs() >= side / 2.0 + ramp)
            }
            Component::Gaussian { .. } => false,
        }
    }

    fn mass(&self, domain: &Domain) -> f64 {
        match self {
            Component::RampedBox { side, ramp, height, .. } => {
                // Integrating the ramp over nested Chebyshev shells (s + 2t)^d gives
                // ((s + 2w)^(d+1) - s^(d+1)) / (2w(d+1)).
                let d = domain.dim() as i32;
                let (s, w) = (*side, *ramp);
                height * ((s + 2.0 * w).powi(d + 1) - s.powi(d + 1)) / (2.0 * w * f64::from(d + 1))
            }
            Component::Gaussian { center, sigma, height } => {
                let scale = sigma * std::f64::consts::SQRT_2;
                let per_axis: f64 = (0..domain.dim())
                    .map(|i| {
                        let hi = statrs::function::erf::erf((domain.upper[i] - center[i]) / scale);
                        let lo = statrs::function::erf::erf((domain.lower[i] - center[i]) / scale);
                        sigma * (std::f64::consts::PI / 2.0).sqrt() * (hi - lo)
                    })
                    .product();
                height * per_axis
            }
        }
    }

    fn lipschitz(&self) -> f64 {
        match self {
            Component::RampedBox { ramp, height, .. } => height / ramp,
            // |grad| = h r / s^2 exp(-r^2 / 2s^2) peaks at r = s.
            Component::Gaussian { sigma, height, .. } => height * (-0.5f64).exp() / sigma,
        }
    }

    fn bounds_on(&self, domain: &Domain) -> (f64, f64) {
        match self {
            Component::RampedBox { height, .. } => (0.0, *height),
            Component::Gaussian { center, sigma, height } => {
                let (mut near, mut far) = (0.0, 0.0);
                for (i, c) in center.iter().enumerate() {
                    let (l, u) = (domain.lower[i], domain.upper[i]);
                    let n = if *c < l {
                        l - c
                    } else if *c > u {
                        c - u
                    } else {
                        0.0
                    };
                    let f = (c - l).abs().max((u - c).abs());
                    near += n * n;
                    far += f * f;
                }
                let g = |r2: f64| height * (-r2 / (2.0 * sigma * sigma)).exp();
                (g(far), g(near))
            }
        }
    }

    fn validate(&self, domain: &Domain) -> Result<()> {
        if self.center().len() != domain.dim() {
            return Err(Error::DimensionMismatch { expected: domain.dim(), got: self.center().len() });
        }
        match self {
            Component::RampedBox { center, side, ramp, height } => {
                if !(*side > 0.0 && *ramp > 0.0 && *height >= 0.0) {
                    return Err(Error::InvalidModel("ramped box needs side > 0, ramp > 0, height >= 0".into()));
                }
                let reach = side / 2.0 + ramp;
                let inside = center
                    .iter()
                    .enumerate()
                    .all(|(i, c)| c - reach >= domain.lower[i] && c + reach <= domain.upper[i]);
                if !inside {
                    return Err(Error::InvalidModel("ramped box support must lie inside the domain".into()));
                }
            }
            Component::Gaussian { sigma, height, .. } => {
                if !(*sigma > 0.0 && *height >= 0.0) {
                    return Err(Error::InvalidModel("gaussian bump needs sigma > 0, height >= 0".into()));
                }
            }
        }
        Ok(())
    }
}

/// Parameters of the two-plateau layout.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSquares {
    pub centers: [[f64; 2]; 2],
    pub side: f64,
    pub ramp: f64,
    /// Plateau level relative to the background level.
    pub ratio: f64,
}

impl Default for TwoSquares {
    fn default() -> Self {
        Self { centers: [[0.3, 0.5], [0.7, 0.5]], side: 0.2, ramp: 0.05, ratio: 16.0 }
    }
}

/// Parameters of the single-bump layout.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBump {
    pub center: [f64; 2],
    pub sigma: f64,
    /// Peak density relative to the background level.
    pub peak_ratio: f64,
}

impl Default for GaussianBump {
    fn default() -> Self {
        Self { center: [0.5, 0.5], sigma: 0.12, peak_ratio: 8.0 }
    }
}

/// Analytic density on a box, normalized to unit mass.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityModel {
    kind: DensityKind,
    domain: Domain,
    background: f64,
    components: Vec<Component>,
    mass: f64,
    lipschitz: f64,
    p_min: f64,
    p_max: f64,
}

impl DensityModel {
    /// General constructor. `background` and component heights are
    /// unnormalized; the model rescales them to unit total mass.
    pub fn mixture(domain: Domain, background: f64, components: Vec<Component>) -> Result<Self> {
        Self::build(DensityKind::Mixture, domain, background, components)
    }

    pub fn uniform(domain: Domain) -> Self {
        Self::build(DensityKind::Uniform, domain, 1.0, Vec::new()).expect("uniform model is always valid")
    }

    pub fn two_squares(params: &TwoSquares) -> Result<Self> {
        if params.ratio < 1.0 {
            return Err(Error::InvalidModel("plateau ratio must be at least 1".into()));
        }
        let components = params
            .centers
            .iter()
            .map(|c| Component::RampedBox {
                center: c.to_vec(),
                side: params.side,
                ramp: params.ramp,
                height: params.ratio - 1.0,
            })
            .collect();
        Self::build(DensityKind::TwoSquares, Domain::unit(2), 1.0, components)
    }

    pub fn gaussian_bump(params: &GaussianBump) -> Result<Self> {
        if params.peak_ratio < 1.0 {
            return Err(Error::InvalidModel("peak ratio must be at least 1".into()));
        }
        let bump = Component::Gaussian {
            center: params.center.to_vec(),
            sigma: params.sigma,
            height: params.peak_ratio - 1.0,
        };
        Self::build(DensityKind::GaussianBump, Domain::unit(2), 1.0, vec![bump])
    }

    fn build(kind: DensityKind, domain: Domain, background: f64, components: Vec<Component>) -> Result<Self> {
        if !(background > 0.0 && background.is_finite()) {
            return Err(Error::InvalidModel("background level must be positive".into()));
        }
        for c in &components {
            c.validate(&domain)?;
        }
        let mass = background * domain.volume() + components.iter().map(|c| c.mass(&domain)).sum::<f64>();

        // Ramped boxes with disjoint supports never overlap, so the largest
        // slope and the largest height bound the whole model.
        let disjoint = components.iter().all(|c| matches!(c, Component::RampedBox { .. }))
            && components.iter().enumerate().all(|(i, a)| components[i + 1..].iter().all(|b| boxes_disjoint(a, b)));
        let lipschitz_sum: f64 = components.iter().map(Component::lipschitz).sum();
        let lipschitz_max = components.iter().map(Component::lipschitz).fold(0.0, f64::max);
        let bounds: Vec<(f64, f64)> = components.iter().map(|c| c.bounds_on(&domain)).collect();
        let low = background + bounds.iter().map(|b| b.0).sum::<f64>();
        let high = if disjoint {
            background + bounds.iter().map(|b| b.1).fold(0.0, f64::max)
        } else {
            background + bounds.iter().map(|b| b.1).sum::<f64>()
        };

        Ok(Self {
            kind,
            domain,
            background,
            mass,
            lipschitz: if disjoint { lipschitz_max } else { lipschitz_sum } / mass,
            p_min: low / mass,
            p_max: high / mass,
            components,
        })
    }

    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Normalized background level.
    pub fn background_level(&self) -> f64 {
        self.background / self.mass
    }

    /// Unnormalized total mass (the normalizer).
    pub fn normalizer(&self) -> f64 {
        self.mass
    }

    /// Density without the domain check. Callers must pass points of the
    /// right dimension.
    pub fn density_unchecked(&self, x: &[f64]) -> f64 {
        (self.background + self.components.iter().map(|c| c.eval(x)).sum::<f64>()) / self.mass
    }

    pub fn eval_density(&self, x: &[f64]) -> Result<f64> {
        self.domain.check(x)?;
        Ok(self.density_unchecked(x))
    }

    /// `q(x) = p(x)^(1/d)`.
    pub fn eval_q(&self, x: &[f64]) -> Result<f64> {
        Ok(q_from_p(self.eval_density(x)?, self.dim()))
    }

    pub fn q_unchecked(&self, x: &[f64]) -> f64 {
        q_from_p(self.density_unchecked(x), self.dim())
    }

    /// `(L, p_min, p_max)`: a Lipschitz constant and density bounds over the
    /// domain. Exact for uniform, two-squares and single-bump models.
    pub fn lipschitz_constants(&self) -> (f64, f64, f64) {
        (self.lipschitz, self.p_min, self.p_max)
    }

    /// Draws `n` i.i.d. points by rejection from the uniform envelope.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleSet> {
        if n == 0 {
            return Err(Error::InvalidArgument("sample size must be at least 1".into()));
        }
        let d = self.dim();
        let mut rng = rng::rng(seed);
        let mut coords = Vec::with_capacity(n * d);
        let mut x = vec![0.0; d];
        let mut accepted = 0;
        while accepted < n {
            for (i, v) in x.iter_mut().enumerate() {
                *v = self.domain.lower[i] + rng.random::<f64>() * self.domain.extent(i);
            }
            let u: f64 = rng.random();
            if u * self.p_max < self.density_unchecked(&x) {
                coords.extend_from_slice(&x);
                accepted += 1;
            }
        }
        Ok(SampleSet { d, coords, seed })
    }
}

fn boxes_disjoint(a: &Component, b: &Component) -> bool {
    match (a, b) {
        (
            Component::RampedBox { center: ca, side: sa, ramp: ra, .. },
            Component::RampedBox { center: cb, side: sb, ramp: rb, .. },
        ) => {
            let reach = sa / 2.0 + ra + sb / 2.0 + rb;
            ca.iter().zip(cb).any(|(x, y)| (x - y).abs() >= reach)
        }
        _ => false,
    }
}

pub fn q_from_p(p: f64, d: usize) -> f64 {
    match d {
        1 => p,
        2 => p.sqrt(),
        3 => p.cbrt(),
        _ => p.powf(1.0 / d as f64),
    }
}

/// Points in R^d, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    d: usize,
    coords: Vec<f64>,
    seed: u64,
}

impl SampleSet {
    /// Wraps explicit coordinates (row-major, `d` per point). The seed is
    /// recorded as 0.
    pub fn from_coords(d: usize, coords: Vec<f64>) -> Result<Self> {
        Self::with_seed(d, coords, 0)
    }

    pub fn with_seed(d: usize, coords: Vec<f64>, seed: u64) -> Result<Self> {
        if d == 0 || coords.len() % d != 0 {
            return Err(Error::InvalidArgument(format!(
                "{} coordinates cannot be split into points of dimension {d}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("coordinates must be finite".into()));
        }
        Ok(Self { d, coords, seed })
    }

    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let d = points.first().map_or(0, |p| p.as_ref().len());
        if points.iter().any(|p| p.as_ref().len() != d) {
            return Err(Error::InvalidArgument("points have inconsistent dimensions".into()));
        }
        Self::from_coords(d, points.iter().flat_map(|p| p.as_ref().iter().copied()).collect())
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.d)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# seed={} n={} d={}", self.seed, self.len(), self.d)?;
        for p in self.iter() {
            let row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.write_csv(&mut out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse("sample csv", "empty input"))?
            .map_err(|e| Error::parse("sample csv", e.to_string()))?;
        let fields = parse_header(&header, "sample csv")?;
        let get = |key: &str| -> Result<u64> {
            fields
                .iter()
                .find(|(k, _)| k == key)
                .ok_or_else(|| Error::parse("sample csv", format!("header lacks `{key}`")))?
                .1
                .parse()
                .map_err(|_| Error::parse("sample csv", format!("bad value for `{key}`")))
        };
        let (seed, n, d) = (get("seed")?, get("n")? as usize, get("d")? as usize);
        let mut coords = Vec::with_capacity(n * d);
        for line in lines {
            let line = line.map_err(|e| Error::parse("sample csv", e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::parse("sample csv", e.to_string()))?;
            if row.len() != d {
                return Err(Error::parse("sample csv", format!("row has {} values, expected {d}", row.len())));
            }
            coords.extend(row);
        }
        if coords.len() != n * d {
            return Err(Error::parse("sample csv", format!("expected {n} rows")));
        }
        Self::with_seed(d, coords, seed)
    }
}

/// Splits a `# key=value key=value` header line.
pub(crate) fn parse_header(line: &str, what: &str) -> Result<Vec<(String, String)>> {
    let body = line.strip_prefix('#').ok_or_else(|| Error::parse(what, "header must start with `#`"))?;
    body.split_whitespace()
        .map(|tok| {
            tok.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| Error::parse(what, format!("malformed header token `{tok}`")))
        })
        .collect()
}
