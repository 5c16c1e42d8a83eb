//! Edge-weight schemes.
//!
//! A scheme maps an edge of Euclidean length `t` to a positive weight:
//! `1`, `t`, `t^a`, a user `h(t)`, or the density-free corollary weight
//! `t * f~(r^d / t^d)`.

use std::fmt;
use std::sync::Arc;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng;

/// A named scalar function `R+ -> R+`.
#[derive(Clone)]
pub struct ScalarFn {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl ScalarFn {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), f: Arc::new(f) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn identity() -> Self {
        Self::new("identity", |x| x)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const{c}"), move |_| c)
    }

    pub fn sqrt() -> Self {
        Self::new("sqrt", f64::sqrt)
    }

    pub fn square() -> Self {
        Self::new("square", |x| x * x)
    }

    pub fn power(a: f64) -> Self {
        Self::new(format!("pow{a}"), move |x| x.powf(a))
    }

    /// Looks up one of the built-in functions by name: `identity`, `sqrt`,
    /// `square`, `one`, `const<c>`, `pow<a>`, `xexp` (`x e^-x`), `log1p`.
    pub fn by_name(name: &str) -> Result<Self> {
        Ok(match name {
            "identity" | "id" => Self::identity(),
            "sqrt" => Self::sqrt(),
            "square" => Self::square(),
            "one" => Self::constant(1.0),
            "xexp" => Self::new("xexp", |x| x * (-x).exp()),
            "log1p" => Self::new("log1p", f64::ln_1p),
            other => {
                if let Some(c) = other.strip_prefix("const") {
                    Self::constant(c.parse().map_err(|_| Error::parse("function", format!("bad constant `{c}`")))?)
                } else if let Some(a) = other.strip_prefix("pow") {
                    Self::power(a.parse().map_err(|_| Error::parse("function", format!("bad exponent `{a}`")))?)
                } else {
                    return Err(Error::parse("function", format!("unknown function `{other}`")));
                }
            }
        })
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarFn({})", self.name)
    }
}

#[derive(Debug, Clone)]
pub enum WeightScheme {
    /// Every edge weighs 1; shortest paths count hops.
    Unit,
    /// Edge weight is the Euclidean length.
    Euclidean,
    /// `h(t) = t^exponent`; subadditive for `exponent <= 1`.
    HPower { exponent: f64 },
    /// User-supplied `h(t)`. `subadditive` declares the regime the caller
    /// relies on; builds verify the claim numerically.
    HCustom { h: ScalarFn, subadditive: bool },
    /// `w = t * f~(r^d / t^d)` with `f~` increasing. `r` defaults to
    /// `(k / (n eta_d))^(1/d)` when a kNN graph is built.
    CorollaryF { ftilde: ScalarFn, r: Option<f64> },
}

impl WeightScheme {
    /// Short tag used in file headers and reports.
    pub fn tag(&self) -> String {
        match self {
            WeightScheme::Unit => "unit".into(),
            WeightScheme::Euclidean => "euclidean".into(),
            WeightScheme::HPower { exponent } => format!("h-power:{exponent}"),
            WeightScheme::HCustom { h, .. } => format!("h-custom:{}", h.name()),
            WeightScheme::CorollaryF { ftilde, .. } => format!("corollary-f:{}", ftilde.name()),
        }
    }

    /// Parses `unit`, `euclidean`, `h-power:<a>`, `h-custom:<fn>` and
    /// `corollary-f:<fn>` (function names as in [`ScalarFn::by_name`]).
    pub fn parse(tag: &str) -> Result<Self> {
        let (head, arg) = match tag.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (tag, None),
        };
        let need = |what: &str| arg.ok_or_else(|| Error::parse("scheme", format!("`{head}` needs `:{what}`")));
        Ok(match head {
            "unit" => WeightScheme::Unit,
            "euclidean" => WeightScheme::Euclidean,
            "h-power" => WeightScheme::HPower {
                exponent: need("exponent")?
                    .parse()
                    .map_err(|_| Error::parse("scheme", format!("bad exponent in `{tag}`")))?,
            },
            "h-custom" => {
                let h = ScalarFn::by_name(need("function")?)?;
                let subadditive = match h.name() {
                    "square" => false,
                    name => name.strip_prefix("pow").and_then(|a| a.parse::<f64>().ok()).is_none_or(|a| a <= 1.0),
                };
                WeightScheme::HCustom { h, subadditive }
            }
            "corollary-f" => WeightScheme::CorollaryF { ftilde: ScalarFn::by_name(need("function")?)?, r: None },
            _ => return Err(Error::parse("scheme", format!("unknown weight scheme `{tag}`"))),
        })
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, WeightScheme::Unit)
    }

    /// Whether the scheme is declared to lie in the subadditive regime.
    pub fn declares_subadditive(&self) -> bool {
        match self {
            WeightScheme::Unit | WeightScheme::Euclidean => true,
            WeightScheme::HPower { exponent } => *exponent <= 1.0,
            WeightScheme::HCustom { subadditive, .. } => *subadditive,
            WeightScheme::CorollaryF { .. } => true,
        }
    }

    /// Returns the scheme with the corollary radius filled in when unset.
    pub fn with_default_r(&self, r: f64) -> Self {
        match self {
            WeightScheme::CorollaryF { ftilde, r: None } => {
                WeightScheme::CorollaryF { ftilde: ftilde.clone(), r: Some(r) }
            }
            other => other.clone(),
        }
    }

    pub fn corollary_r(&self) -> Option<f64> {
        match self {
            WeightScheme::CorollaryF { r, .. } => *r,
            _ => None,
        }
    }

    /// Weight of an edge of length `t > 0` in dimension `d`.
    pub fn weight_for_length(&self, t: f64, d: usize) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument(format!("edge length must be positive, got {t}")));
        }
        Ok(match self {
            WeightScheme::Unit => 1.0,
            WeightScheme::Euclidean => t,
            WeightScheme::HPower { exponent } => t.powf(*exponent),
            WeightScheme::HCustom { h, .. } => h.eval(t),
            WeightScheme::CorollaryF { ftilde, r } => {
                let r = r.ok_or_else(|| Error::InvalidArgument("corollary-f scheme has no radius r".into()))?;
                t * ftilde.eval((r / t).powi(d as i32))
            }
        })
    }

    /// Weight of the edge between `xi` and `xj`.
    pub fn edge_weight(&self, xi: &[f64], xj: &[f64]) -> Result<f64> {
        if xi.len() != xj.len() {
            return Err(Error::DimensionMismatch { expected: xi.len(), got: xj.len() });
        }
        let t = crate::spatial::dist2(xi, xj).sqrt();
        if t == 0.0 {
            return Err(Error::DegenerateEdge(0, 0));
        }
        self.weight_for_length(t, xi.len())
    }
}

/// Limit density-to-weight function of the subadditive regime:
/// `f = h(r / q) * q / r`.
pub fn limit_f_subadditive(h: &dyn Fn(f64) -> f64, r: f64, q: f64) -> Result<f64> {
    if !(r > 0.0 && q > 0.0) {
        return Err(Error::InvalidArgument(format!("need r > 0 and q > 0, got r = {r}, q = {q}")));
    }
    Ok(h(r / q) * q / r)
}

/// Checks `h(x) + h(y) >= h(x + y)` on `samples` random pairs in `(0, max_len]`.
pub fn check_subadditive(h: &dyn Fn(f64) -> f64, max_len: f64, samples: usize, seed: u64) -> Result<()> {
    let mut rng = rng::rng(seed);
    for _ in 0..samples {
        let x = max_len * (1.0 - rng.random::<f64>());
        let y = max_len * (1.0 - rng.random::<f64>());
        let (hx, hy, hxy) = (h(x), h(y), h(x + y));
        if hx + hy < hxy - 1e-12 * hxy.abs().max(1.0) {
            return Err(Error::NotSubadditive { x, y });
        }
    }
    Ok(())
}

/// Checks `h(x) + h(y) <= h(x + y)` on `samples` random pairs in `(0, max_len]`.
pub fn check_superadditive(h: &dyn Fn(f64) -> f64, max_len: f64, samples: usize, seed: u64) -> Result<()> {
    let mut rng = rng::rng(seed);
    for _ in 0..samples {
        let x = max_len * (1.0 - rng.random::<f64>());
        let y = max_len * (1.0 - rng.random::<f64>());
        let (hx, hy, hxy) = (h(x), h(y), h(x + y));
        if hx + hy > hxy + 1e-12 * hxy.abs().max(1.0) {
            return Err(Error::InvalidArgument(format!("h is not superadditive at ({x}, {y})")));
        }
    }
    Ok(())
}

/// Checks that `h` is nondecreasing on a uniform grid over `[lo, hi]`.
pub fn check_increasing(h: &dyn Fn(f64) -> f64, lo: f64, hi: f64, steps: usize) -> Result<()> {
    let steps = steps.max(1);
    let mut prev = (lo, h(lo));
    for s in 1..=steps {
        let x = lo + (hi - lo) * s as f64 / steps as f64;
        let v = h(x);
        if v < prev.1 - 1e-12 * prev.1.abs().max(1.0) {
            return Err(Error::NotIncreasing { x: prev.0, y: x });
        }
        prev = (x, v);
    }
    Ok(())
}
