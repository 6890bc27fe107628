//! Slowly varying functions and Potter-type bounds.

use crate::error::bail;
use crate::Result;
use alloc::vec::Vec;
use core::f64::consts::E;

/// The family a slowly varying function belongs to.
#[derive(Debug, Clone, PartialEq)]
pub enum SlowKind {
    /// `ℓ(s) = c`.
    Constant(f64),
    /// `ℓ(s) = (ln(e + s))^p`.
    PowerLog(f64),
    /// `ℓ(s) = ln(e + ln(e + s))`.
    IteratedLog,
    /// Log-log linear interpolation through `(s, ℓ(s))` pairs, constant
    /// outside the table. Whether `ℓ(r) ln r → ∞` cannot be read off a finite
    /// table, so the user declares it.
    Tabulated {
        points: Vec<(f64, f64)>,
        log_product_diverges: Option<bool>,
    },
}

/// A slowly varying function together with the data of a Potter bound
/// `ℓ(λs)/ℓ(s) ≤ C (1 + λ^δ)` for `s ≥ M`, `λ ≥ M/s`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlowVaryingFn {
    kind: SlowKind,
    potter_delta: f64,
    potter_scale: f64,
    /// Smallest dilation the stored constant is valid for. Only matters for
    /// decreasing ℓ, where no constant works down to `λ = M/s` uniformly in `s`.
    potter_lambda_floor: f64,
    potter_constant: f64,
}

const DEFAULT_DELTA: f64 = 0.5;
const DEFAULT_SCALE: f64 = 1.0;
const DEFAULT_LAMBDA_FLOOR: f64 = 1e-3;

impl SlowVaryingFn {
    fn build(kind: SlowKind) -> Result<Self> {
        let mut s = Self {
            kind,
            potter_delta: DEFAULT_DELTA,
            potter_scale: DEFAULT_SCALE,
            potter_lambda_floor: DEFAULT_LAMBDA_FLOOR,
            potter_constant: 1.0,
        };
        s.potter_constant = s.potter_bound(s.potter_lambda_floor);
        Ok(s)
    }

    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            bail!(InvalidInput, "constant slowly varying function needs c > 0, got {c}");
        }
        Self::build(SlowKind::Constant(c))
    }

    pub fn one() -> Self {
        Self::constant(1.0).unwrap()
    }

    pub fn power_log(p: f64) -> Result<Self> {
        if !p.is_finite() {
            bail!(InvalidInput, "power-of-log exponent must be finite");
        }
        Self::build(SlowKind::PowerLog(p))
    }

    pub fn iterated_log() -> Self {
        Self::build(SlowKind::IteratedLog).unwrap()
    }

    pub fn tabulated(mut points: Vec<(f64, f64)>, log_product_diverges: Option<bool>) -> Result<Self> {
        if points.len() < 2 {
            bail!(InvalidInput, "tabulated slowly varying function needs at least two points");
        }
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                bail!(InvalidInput, "tabulated abscissae must be distinct");
            }
        }
        if points.iter().any(|&(s, v)| !(s > 0.0 && v > 0.0 && s.is_finite() && v.is_finite())) {
            bail!(InvalidInput, "tabulated points must be positive and finite");
        }
        Self::build(SlowKind::Tabulated { points, log_product_diverges })
    }

    /// Replaces the Potter parameters and recomputes the stored constant.
    pub fn with_potter(mut self, delta: f64, scale: f64, lambda_floor: f64) -> Result<Self> {
        if !(delta > 0.0 && scale > 0.0 && lambda_floor > 0.0) {
            bail!(InvalidInput, "Potter parameters must be positive");
        }
        self.potter_delta = delta;
        self.potter_scale = scale;
        self.potter_lambda_floor = lambda_floor;
        self.potter_constant = self.potter_bound(lambda_floor);
        Ok(self)
    }

    pub fn kind(&self) -> &SlowKind {
        &self.kind
    }

    pub fn potter_delta(&self) -> f64 {
        self.potter_delta
    }

    pub fn potter_scale(&self) -> f64 {
        self.potter_scale
    }

    pub fn potter_constant(&self) -> f64 {
        self.potter_constant
    }

    pub fn eval(&self, s: f64) -> f64 {
        match &self.kind {
            SlowKind::Constant(c) => *c,
            SlowKind::PowerLog(p) => libm::pow(libm::log(E + s), *p),
            SlowKind::IteratedLog => libm::log(E + libm::log(E + s)),
            SlowKind::Tabulated { points, .. } => {
                let first = points[0];
                let last = points[points.len() - 1];
                if s <= first.0 {
                    return first.1;
                }
                if s >= last.0 {
                    return last.1;
                }
                let i = points.partition_point(|p| p.0 <= s);
                let (s0, v0) = points[i - 1];
                let (s1, v1) = points[i];
                let t = libm::log(s / s0) / libm::log(s1 / s0);
                libm::exp(libm::log(v0) + t * libm::log(v1 / v0))
            }
        }
    }

    /// `Some(c)` when ℓ is the constant `c`.
    pub fn as_constant(&self) -> Option<f64> {
        match self.kind {
            SlowKind::Constant(c) => Some(c),
            SlowKind::PowerLog(p) if p == 0.0 => Some(1.0),
            _ => None,
        }
    }

    /// Whether `ℓ(r) ln r → ∞`. `None` for a tabulated ℓ without declaration.
    pub fn log_product_diverges(&self) -> Option<bool> {
        match &self.kind {
            SlowKind::Constant(_) => Some(true),
            SlowKind::PowerLog(p) => Some(*p > -1.0),
            SlowKind::IteratedLog => Some(true),
            SlowKind::Tabulated { log_product_diverges, .. } => *log_product_diverges,
        }
    }

    /// Whether `∫^∞ ℓ(r)/r dr` diverges, which decides finiteness of the
    /// moment of order exactly α.
    pub fn log_integral_diverges(&self) -> bool {
        match &self.kind {
            SlowKind::PowerLog(p) => *p >= -1.0,
            _ => true,
        }
    }

    /// A constant `C` with `ℓ(λs)/ℓ(s) ≤ C(1 + λ^δ)` for `s ≥ M`,
    /// `λ ≥ max(M/s, lambda_floor)`.
    pub fn potter_bound(&self, lambda_floor: f64) -> f64 {
        let delta = self.potter_delta;
        match &self.kind {
            SlowKind::Constant(_) => 1.0,
            SlowKind::PowerLog(p) if *p >= 0.0 => {
                // ratio ≤ (1 + ln λ)^p for λ ≥ 1, ≤ 1 otherwise
                let r = p / delta;
                if r > 1.0 {
                    libm::pow(r, *p) * libm::exp(delta - p)
                } else {
                    1.0
                }
            }
            SlowKind::PowerLog(p) => {
                // ratio ≤ (1 + ln(1/λ)/ln(e + M))^{|p|} for λ < 1, ≤ 1 otherwise
                let lf = lambda_floor.min(1.0);
                libm::pow(1.0 + libm::log(1.0 / lf) / libm::log(E + self.potter_scale), -p).max(1.0)
            }
            SlowKind::IteratedLog => (1.0 / (E * delta)).max(1.0),
            SlowKind::Tabulated { points, .. } => {
                let max = points.iter().map(|p| p.1).fold(f64::MIN, f64::max);
                let min = points.iter().map(|p| p.1).fold(f64::MAX, f64::min);
                max / min
            }
        }
    }
}

/// Outcome of [`potter_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotterReport {
    /// Smallest `C` satisfying the bound on the sample set.
    pub c_observed: f64,
    /// Stored constant, valid down to the smallest sampled dilation.
    pub c_bound: f64,
    pub pass: bool,
}

/// Measures the Potter ratio `ℓ(λs) / (ℓ(s)(1 + λ^δ))` over `(s, λ)` samples.
pub fn potter_check(ell: &SlowVaryingFn, samples: &[(f64, f64)]) -> Result<PotterReport> {
    if samples.is_empty() {
        bail!(InvalidInput, "empty Potter sample set");
    }
    let m = ell.potter_scale;
    let mut c_observed = 0.0f64;
    let mut lambda_min = f64::INFINITY;
    for &(s, lambda) in samples {
        if !(s >= m && lambda * s >= m * (1.0 - 1e-12) && lambda.is_finite() && s.is_finite()) {
            bail!(InvalidInput, "sample (s={s}, λ={lambda}) outside s ≥ {m}, λ ≥ {m}/s");
        }
        let ratio = ell.eval(lambda * s) / ell.eval(s);
        c_observed = c_observed.max(ratio / (1.0 + libm::pow(lambda, ell.potter_delta)));
        lambda_min = lambda_min.min(lambda);
    }
    let c_bound = if lambda_min >= ell.potter_lambda_floor {
        ell.potter_constant
    } else {
        ell.potter_bound(lambda_min)
    };
    Ok(PotterReport {
        c_observed,
        c_bound,
        pass: c_observed <= c_bound * (1.0 + 1e-12),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::geomspace;

    fn grid(s_lo: f64, s_hi: f64, l_lo: f64, l_hi: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for s in geomspace(s_lo, s_hi, 25) {
            for l in geomspace(l_lo, l_hi, 25) {
                out.push((s, l));
            }
        }
        out
    }

    #[test]
    fn constant_ratio_is_one() {
        let r = potter_check(&SlowVaryingFn::one(), &grid(10.0, 1e6, 0.1, 1e3)).unwrap();
        assert!(r.c_observed <= 1.0);
        assert!(r.pass);
    }

    #[test]
    fn log_passes_with_finite_constant() {
        let ell = SlowVaryingFn::power_log(1.0).unwrap().with_potter(0.5, 1.0, 1e-3).unwrap();
        let r = potter_check(&ell, &grid(10.0, 1e6, 0.1, 1e3)).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.c_observed.is_finite() && r.c_observed > 0.0);
    }

    #[test]
    fn inverse_square_log_passes() {
        let ell = SlowVaryingFn::power_log(-2.0).unwrap();
        let r = potter_check(&ell, &grid(10.0, 1e6, 0.1, 1e3)).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn iterated_log_passes() {
        let ell = SlowVaryingFn::iterated_log();
        let r = potter_check(&ell, &grid(1e3, 1e8, 1e-3, 1e5)).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn empty_and_out_of_domain_samples_rejected() {
        let ell = SlowVaryingFn::one();
        assert!(potter_check(&ell, &[]).is_err());
        assert!(potter_check(&ell, &[(0.5, 1.0)]).is_err());
        assert!(potter_check(&ell, &[(10.0, 0.01)]).is_err());
    }

    #[test]
    fn tabulated_interpolates_log_log() {
        let ell = SlowVaryingFn::tabulated(alloc::vec![(1.0, 1.0), (100.0, 4.0)], Some(true)).unwrap();
        assert!((ell.eval(10.0) - 2.0).abs() < 1e-12);
        assert_eq!(ell.eval(0.5), 1.0);
        assert_eq!(ell.eval(1e9), 4.0);
    }

    #[test]
    fn critical_divergence_flags() {
        assert_eq!(SlowVaryingFn::one().log_product_diverges(), Some(true));
        assert_eq!(SlowVaryingFn::power_log(-0.5).unwrap().log_product_diverges(), Some(true));
        assert_eq!(SlowVaryingFn::power_log(-2.0).unwrap().log_product_diverges(), Some(false));
        let t = SlowVaryingFn::tabulated(alloc::vec![(1.0, 1.0), (2.0, 1.0)], None).unwrap();
        assert_eq!(t.log_product_diverges(), None);
    }

    #[test]
    fn slow_variation_against_powers() {
        // s^ζ ℓ(s) increases and s^{-ζ} ℓ(s) decreases along the tail.
        let fns = [
            SlowVaryingFn::one(),
            SlowVaryingFn::power_log(3.0).unwrap(),
            SlowVaryingFn::power_log(-2.0).unwrap(),
            SlowVaryingFn::iterated_log(),
        ];
        let zeta = 0.1;
        let ss = geomspace(1e30, 1e200, 30);
        for ell in &fns {
            let up: Vec<f64> = ss.iter().map(|s| libm::log(*s) * zeta + libm::log(ell.eval(*s))).collect();
            let down: Vec<f64> = ss.iter().map(|s| -libm::log(*s) * zeta + libm::log(ell.eval(*s))).collect();
            assert!(up.windows(2).all(|w| w[1] > w[0]), "{ell:?}");
            assert!(down.windows(2).all(|w| w[1] < w[0]), "{ell:?}");
        }
    }

    #[test]
    fn log_slope_of_power_log_vanishes() {
        let ell = SlowVaryingFn::power_log(2.0).unwrap();
        let slope = |s: f64| libm::log(ell.eval(s)) / libm::log(s);
        let vals: Vec<f64> = geomspace(1e3, 1e300, 12).into_iter().map(slope).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        assert!(*vals.last().unwrap() < 0.03);
    }
}
