//! Explicit constants of the unweighted-kNN limit theorem.
//!
//! Everything here is a closed-form function of `(n, k, d, lambda, a)` and,
//! for the admissibility bound on `lambda`, of the density's Lipschitz
//! constant and lower bound.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Volume of the Euclidean unit ball in R^d.
pub fn unit_ball_volume(d: usize) -> f64 {
    assert!(d >= 1, "dimension must be positive");
    // eta_d = 2 pi / d * eta_{d-2}, eta_0 = 1, eta_1 = 2.
    let mut eta = if d % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if d % 2 == 0 { 2 } else { 3 };
    while k <= d {
        eta *= 2.0 * PI / k as f64;
        k += 2;
    }
    eta
}

/// `(k / (eta_d n))^(1/d)`: converts hop counts into q-distance units.
pub fn rescale_factor(n: usize, k: usize, d: usize) -> f64 {
    (k as f64 / (unit_ball_volume(d) * n as f64)).powf(1.0 / d as f64)
}

/// `k = round(ln(n)^(1 + alpha))`, clamped to `[2, n - 1]`.
pub fn knn_schedule(n: usize, alpha: f64) -> usize {
    assert!(n >= 3, "knn_schedule needs n >= 3");
    let k = (n as f64).ln().powf(1.0 + alpha).round() as usize;
    k.clamp(2, n - 1)
}

/// Connectivity radii in q-distance and their Euclidean-scaled companions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectivityRadii {
    pub r_low: f64,
    pub r_up: f64,
    pub r_low_hat: f64,
    pub r_up_hat: f64,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..0.5).contains(&lambda) {
        return Err(Error::Inadmissible(format!("lambda = {lambda} must lie in [0, 1/2)")));
    }
    Ok(())
}

fn check_a(a: f64) -> Result<()> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Inadmissible(format!("a = {a} must lie in (0, 1)")));
    }
    Ok(())
}

pub fn connectivity_radii(n: usize, k: usize, d: usize, lambda: f64) -> Result<ConnectivityRadii> {
    check_lambda(lambda)?;
    let base = k as f64 / (n as f64 * unit_ball_volume(d));
    let inv_d = 1.0 / d as f64;
    let r_low = (base / (1.0 + lambda)).powf(inv_d);
    let r_up = (base / (1.0 - lambda)).powf(inv_d);
    Ok(ConnectivityRadii {
        r_low,
        r_up,
        r_low_hat: r_low / (1.0 + lambda).powf(inv_d),
        r_up_hat: r_up / (1.0 - lambda).powf(inv_d),
    })
}

/// `e3 = 2^d / (1 - lambda)^2`.
pub fn e3(d: usize, lambda: f64) -> f64 {
    2f64.powi(d as i32) / (1.0 - lambda).powi(2)
}

/// Dense-sampling radius and the probability that it holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingRadius {
    pub varsigma: f64,
    /// `1 - e3 n exp(-k^a / 6)`; often negative (vacuous) at moderate n.
    pub success_probability: f64,
}

pub fn sampling_radius(n: usize, k: usize, d: usize, a: f64, lambda: f64) -> Result<SamplingRadius> {
    check_a(a)?;
    check_lambda(lambda)?;
    let inv_d = 1.0 / d as f64;
    let kf = k as f64;
    let varsigma = (1.0 + lambda).powf(inv_d) * (kf.powf(a) / (unit_ball_volume(d) * n as f64)).powf(inv_d);
    let success_probability = 1.0 - e3(d, lambda) * n as f64 * (-kf.powf(a) / 6.0).exp();
    Ok(SamplingRadius { varsigma, success_probability })
}

/// `(e1, e2, e3)` of the sandwich `e1 D_q <= e2 D_sp <= D_q - e2`.
/// Fails unless the dense-sampling radius satisfies `varsigma < r_low / 4`.
pub fn sandwich_constants(n: usize, k: usize, d: usize, lambda: f64, a: f64) -> Result<(f64, f64, f64)> {
    let radii = connectivity_radii(n, k, d, lambda)?;
    let s = sampling_radius(n, k, d, a, lambda)?;
    if !(s.varsigma < radii.r_low / 4.0) {
        return Err(Error::Inadmissible(format!(
            "dense sampling fails: varsigma = {} is not below r_low / 4 = {}",
            s.varsigma,
            radii.r_low / 4.0
        )));
    }
    let e2 = radii.r_low - 2.0 * s.varsigma;
    Ok((e2 / radii.r_up, e2, e3(d, lambda)))
}

/// Closed form of `e1` in terms of `lambda`, `k`, `a` and `d` only.
pub fn e1_closed_form(k: usize, d: usize, lambda: f64, a: f64) -> f64 {
    let inv_d = 1.0 / d as f64;
    ((1.0 - lambda) / (1.0 + lambda)).powf(inv_d)
        - 2.0 * ((1.0 - lambda * lambda) / (k as f64).powf(1.0 - a)).powf(inv_d)
}

/// Smallest admissible `lambda` for a density with Lipschitz constant `l`
/// and lower bound `p_min`. Fails when that bound is not below 1/2.
pub fn admissible_lambda(n: usize, k: usize, d: usize, l: f64, p_min: f64) -> Result<f64> {
    if !(p_min > 0.0 && l >= 0.0) {
        return Err(Error::InvalidArgument("need p_min > 0 and L >= 0".into()));
    }
    let inv_d = 1.0 / d as f64;
    let lambda_min =
        4.0 * l / (unit_ball_volume(d).powf(inv_d) * p_min.powf(1.0 + inv_d)) * (k as f64 / n as f64).powf(inv_d);
    if lambda_min >= 0.5 {
        return Err(Error::NoAdmissibleLambda { lambda_min });
    }
    Ok(lambda_min)
}

/// Supremum of admissible `a`: `1 - log_k(4^d (1 + lambda)^2)`.
pub fn a_max(k: usize, d: usize, lambda: f64) -> f64 {
    1.0 - (4f64.powi(d as i32) * (1.0 + lambda).powi(2)).ln() / (k as f64).ln()
}

/// All theorem constants for one parameter setting, with admissibility flags.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoremConstants {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub lambda: f64,
    pub a: f64,
    pub eta_d: f64,
    pub radii: ConnectivityRadii,
    pub varsigma: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub rescale: f64,
    /// `1 - 3 e3 n exp(-lambda^2 k^a / 6)`.
    pub probability_bound: f64,
    pub a_max: f64,
    /// `varsigma < r_low / 4`.
    pub dense_sampling: bool,
    /// Lower bound on `lambda` from the density, when one was supplied.
    pub lambda_min: Option<f64>,
}

impl TheoremConstants {
    /// Evaluates every constant. Only out-of-range `lambda` or `a` is an
    /// error; inadmissible combinations are reported through the flags.
    pub fn evaluate(n: usize, k: usize, d: usize, lambda: f64, a: f64) -> Result<Self> {
        if d == 0 || k == 0 || n <= k {
            return Err(Error::InvalidArgument(format!("need d >= 1 and 1 <= k < n, got n={n} k={k} d={d}")));
        }
        let radii = connectivity_radii(n, k, d, lambda)?;
        let s = sampling_radius(n, k, d, a, lambda)?;
        let e2 = radii.r_low - 2.0 * s.varsigma;
        let e3 = e3(d, lambda);
        Ok(Self {
            n,
            k,
            d,
            lambda,
            a,
            eta_d: unit_ball_volume(d),
            radii,
            varsigma: s.varsigma,
            e1: e2 / radii.r_up,
            e2,
            e3,
            rescale: rescale_factor(n, k, d),
            probability_bound: 1.0 - 3.0 * e3 * n as f64 * (-lambda * lambda * (k as f64).powf(a) / 6.0).exp(),
            a_max: a_max(k, d, lambda),
            dense_sampling: s.varsigma < radii.r_low / 4.0,
            lambda_min: None,
        })
    }

    /// Adds the density-dependent lower bound on `lambda` (infinite when
    /// no admissible value exists).
    pub fn with_density(mut self, lipschitz: f64, p_min: f64) -> Self {
        self.lambda_min = Some(match admissible_lambda(self.n, self.k, self.d, lipschitz, p_min) {
            Ok(v) => v,
            Err(Error::NoAdmissibleLambda { lambda_min }) => lambda_min,
            Err(_) => f64::INFINITY,
        });
        self
    }

    pub fn admissible(&self) -> bool {
        self.dense_sampling && self.a < self.a_max && self.lambda_min.is_none_or(|m| self.lambda >= m)
    }
}

impl fmt::Display for TheoremConstants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n = {}", self.n)?;
        writeln!(f, "k = {}", self.k)?;
        writeln!(f, "d = {}", self.d)?;
        writeln!(f, "lambda = {}", self.lambda)?;
        writeln!(f, "a = {}", self.a)?;
        writeln!(f, "eta_d = {:.10}", self.eta_d)?;
        writeln!(f, "r_low = {:.10}", self.radii.r_low)?;
        writeln!(f, "r_up = {:.10}", self.radii.r_up)?;
        writeln!(f, "r_low_hat = {:.10}", self.radii.r_low_hat)?;
        writeln!(f, "r_up_hat = {:.10}", self.radii.r_up_hat)?;
        writeln!(f, "varsigma = {:.10}", self.varsigma)?;
        writeln!(f, "e1 = {:.10}", self.e1)?;
        writeln!(f, "e2 = {:.10}", self.e2)?;
        writeln!(f, "e3 = {:.10}", self.e3)?;
        writeln!(f, "rescale = {:.10}", self.rescale)?;
        writeln!(f, "probability_bound = {:.6e}", self.probability_bound)?;
        writeln!(f, "a_max = {:.10}", self.a_max)?;
        writeln!(f, "dense_sampling = {}", self.dense_sampling)?;
        if let Some(m) = self.lambda_min {
            writeln!(f, "lambda_min = {m:.6e}")?;
        }
        write!(f, "admissible = {}", self.admissible())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn radii_hand_values() {
        let r = connectivity_radii(1000, 10, 2, 0.1).unwrap();
        assert!((r.r_low - 0.053_793_366_115_483_62).abs() < 1e-12);
        assert!((r.r_low / r.r_up - (0.9f64 / 1.1).sqrt()).abs() < 1e-12);
        let zero = connectivity_radii(1000, 10, 2, 0.0).unwrap();
        assert_eq!(zero.r_low, zero.r_up);
        assert!((zero.r_low - rescale_factor(1000, 10, 2)).abs() < 1e-15);
        assert!(connectivity_radii(1000, 10, 2, 0.5).is_err());
    }

    #[test]
    fn rescale_hand_values() {
        assert!((rescale_factor(1000, 10, 2) - 0.056_418_958_354_775_63).abs() < 1e-12);
        assert!((rescale_factor(40, 10, 1) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn sampling_radius_hand_values() {
        let s = sampling_radius(10_000, 100, 2, 0.3, 0.1).unwrap();
        assert!((s.varsigma - 0.011_806_506_382_610_316).abs() < 1e-12);
        assert!(s.success_probability < 0.0);
        // lambda = 0 and a -> 1 recovers the rescale factor.
        let lim = sampling_radius(10_000, 100, 2, 1.0 - 1e-12, 0.0).unwrap();
        assert!((lim.varsigma - rescale_factor(10_000, 100, 2)).abs() < 1e-9);
        assert!(sampling_radius(10_000, 100, 2, 1.0, 0.1).is_err());
        assert!(sampling_radius(10_000, 100, 2, 0.0, 0.1).is_err());
    }

    #[test]
    fn sandwich_hand_values() {
        let (e1, e2, e3) = sandwich_constants(10_000, 100, 2, 0.1, 0.3).unwrap();
        assert!((e1 - 0.507_481_846_308_029_5).abs() < 1e-12);
        assert!((e2 - 0.030_180_353_350_262_985).abs() < 1e-12);
        assert!((e3 - 4.0 / 0.81).abs() < 1e-12);
        assert!((e1 - e1_closed_form(100, 2, 0.1, 0.3)).abs() < 1e-12);
        assert!(e2 < connectivity_radii(10_000, 100, 2, 0.1).unwrap().r_low);
        // k = 28 with a = 0.3 violates dense sampling.
        assert!(matches!(sandwich_constants(10_000, 28, 2, 0.1, 0.3), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn e1_tends_to_one() {
        let e1 = e1_closed_form(10_000_000_000, 2, 1e-4, 0.3);
        assert!((e1 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn a_bound_hand_value_and_monotonicity() {
        assert!((a_max(100, 2, 0.1) - 0.356_547_323_513_812_6).abs() < 1e-12);
        assert!(a_max(100, 2, 0.2) < a_max(100, 2, 0.1));
    }

    #[test]
    fn lambda_bound() {
        assert_eq!(admissible_lambda(10_000, 28, 2, 0.0, 1.0).unwrap(), 0.0);
        assert!(matches!(admissible_lambda(20_000, 31, 2, 103.4, 0.34), Err(Error::NoAdmissibleLambda { .. })));
    }

    #[test]
    fn schedule() {
        assert_eq!(knn_schedule(10_000, 0.5), 28);
        assert_eq!(knn_schedule(30_000, 0.5), 33);
        assert_eq!(knn_schedule(3, 0.5), 2);
        let mut prev = 0;
        for n in (3..200_000).step_by(997) {
            let k = knn_schedule(n, 0.5);
            assert!(k >= prev);
            prev = k;
        }
    }

    #[test]
    fn constants_block_flags_inadmissible_settings() {
        let c = TheoremConstants::evaluate(10_000, 28, 2, 0.1, 0.3).unwrap();
        assert!(!c.dense_sampling && !c.admissible());
        assert!(c.probability_bound < 0.0);
        let ok = TheoremConstants::evaluate(10_000, 100, 2, 0.1, 0.3).unwrap().with_density(0.0, 1.0);
        assert!(ok.admissible());
        let text = ok.to_string();
        assert!(text.contains("e1 = 0.5074818463"));
        assert!(TheoremConstants::evaluate(10, 10, 2, 0.1, 0.3).is_err());
    }
}
