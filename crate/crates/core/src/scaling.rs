//! Regime classification in the `(α, β)` plane and the matching time scales.
//!
//! With `γ = (α - β)/(1 - β)`:
//! - `β < min(α, 2 - α)`: fractional limit of order `γ`, `θ(ε) = φ(ε) ε^γ`;
//! - `α > 1`, `β = 2 - α` and `ℓ(r) ln r → ∞`: classical diffusion on the
//!   anomalous scale `θ(ε) = ε² φ(ε) ln(1/ε)`;
//! - otherwise (`β > 2 - α`, or the borderline with a summable tail):
//!   classical diffusion with `θ(ε) = ε²`,
//!
//! where `φ(ε) = ℓ(ε^{-1/(1-β)})`.

use crate::equilibria::SlowVaryingFn;
use crate::error::bail;
#[allow(unused_imports)]
use crate::math::Float;
use crate::Result;
use alloc::string::String;

/// Tolerance for recognising the borderline `β = 2 - α`.
pub const CRITICAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeKind {
    Fractional,
    Critical,
    Classical,
}

impl RegimeKind {
    pub fn name(&self) -> &'static str {
        match self {
            RegimeKind::Fractional => "fractional",
            RegimeKind::Critical => "critical",
            RegimeKind::Classical => "classical",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRegime {
    kind: RegimeKind,
    gamma: f64,
    alpha: f64,
    beta: f64,
    ell: SlowVaryingFn,
    fallback_to_classical: bool,
}

/// `(α - β)/(1 - β)`.
pub fn gamma_of(alpha: f64, beta: f64) -> f64 {
    (alpha - beta) / (1.0 - beta)
}

/// Classifies `(α, β, ℓ)`; rejects parameters outside `α > 0`,
/// `β < min(1, α)`.
pub fn classify(alpha: f64, beta: f64, ell: &SlowVaryingFn) -> Result<ScalingRegime> {
    if alpha.is_nan() || !beta.is_finite() {
        bail!(InvalidInput, "α and β must be numbers (got α = {alpha}, β = {beta})");
    }
    if !(alpha > 0.0) {
        bail!(UnsupportedRegime, "α = {alpha} violates α > 0");
    }
    if alpha == 1.0 && beta == 1.0 {
        bail!(UnsupportedRegime, "the corner α = β = 1 is excluded");
    }
    if !(beta < 1.0) {
        bail!(UnsupportedRegime, "β = {beta} violates β < 1");
    }
    if !(beta < alpha) {
        bail!(UnsupportedRegime, "β = {beta} violates β < α = {alpha}");
    }
    let mut regime = ScalingRegime {
        kind: RegimeKind::Classical,
        gamma: 2.0,
        alpha,
        beta,
        ell: ell.clone(),
        fallback_to_classical: false,
    };
    let border = 2.0 - alpha;
    if beta < alpha.min(border) && (beta - border).abs() > CRITICAL_TOL {
        regime.kind = RegimeKind::Fractional;
        regime.gamma = gamma_of(alpha, beta);
    } else if alpha > 1.0 && (beta - border).abs() <= CRITICAL_TOL {
        match ell.log_product_diverges() {
            Some(true) => regime.kind = RegimeKind::Critical,
            Some(false) => regime.fallback_to_classical = true,
            None => bail!(
                InvalidInput,
                "β = 2 - α needs to know whether ℓ(r)·ln r → ∞; declare it for tabulated ℓ"
            ),
        }
    }
    Ok(regime)
}

impl ScalingRegime {
    pub fn kind(&self) -> RegimeKind {
        self.kind
    }

    /// Order of the limit operator (2 for the critical and classical kinds).
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn ell(&self) -> &SlowVaryingFn {
        &self.ell
    }

    /// Set when `β = 2 - α` but `ℓ(r) ln r` stays bounded: the second
    /// moment of the rescaled tail is finite and the classical scale applies.
    pub fn fallback_to_classical(&self) -> bool {
        self.fallback_to_classical
    }

    /// `φ(ε) = ℓ(ε^{-1/(1-β)})`.
    pub fn phi(&self, eps: f64) -> f64 {
        self.ell.eval(libm::pow(eps, -1.0 / (1.0 - self.beta)))
    }

    /// `θ(ε)` for `0 < ε < 1`.
    pub fn theta(&self, eps: f64) -> Result<f64> {
        if !(eps > 0.0 && eps < 1.0) {
            bail!(InvalidInput, "ε = {eps} outside (0, 1)");
        }
        Ok(match self.kind {
            RegimeKind::Fractional => self.phi(eps) * libm::pow(eps, self.gamma),
            RegimeKind::Critical => eps * eps * self.phi(eps) * libm::log(1.0 / eps),
            RegimeKind::Classical => eps * eps,
        })
    }

    /// Human-readable form of `θ(ε)`.
    pub fn theta_formula(&self) -> String {
        let phi = if self.ell.as_constant() == Some(1.0) { "" } else { "φ(ε)·" };
        match self.kind {
            RegimeKind::Fractional => alloc::format!("{phi}ε^{}", self.gamma),
            RegimeKind::Critical => alloc::format!("ε²·{phi}ln(1/ε)"),
            RegimeKind::Classical => String::from("ε²"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn one() -> SlowVaryingFn {
        SlowVaryingFn::one()
    }

    #[test]
    fn unit_alpha_at_beta_zero() {
        let r = classify(1.0, 0.0, &one()).unwrap();
        assert_eq!(r.kind(), RegimeKind::Fractional);
        assert_eq!(r.gamma(), 1.0);
        assert!((r.theta(0.1).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn borderline_is_critical_for_log_tails() {
        let r = classify(3.0, -1.0, &SlowVaryingFn::power_log(1.0).unwrap()).unwrap();
        assert_eq!(r.kind(), RegimeKind::Critical);
        assert_eq!(gamma_of(3.0, -1.0), 2.0);
        let r = classify(3.0, -1.0, &one()).unwrap();
        assert_eq!(r.kind(), RegimeKind::Critical);
        let r = classify(1.5, 0.5, &SlowVaryingFn::power_log(-2.0).unwrap()).unwrap();
        assert_eq!(r.kind(), RegimeKind::Classical);
        assert!(r.fallback_to_classical());
        let tab = SlowVaryingFn::tabulated(alloc::vec![(1.0, 1.0), (10.0, 2.0)], None).unwrap();
        assert!(classify(1.5, 0.5, &tab).is_err());
    }

    #[test]
    fn above_borderline_is_classical() {
        let r = classify(3.0, 0.0, &one()).unwrap();
        assert_eq!(r.kind(), RegimeKind::Classical);
        assert!((r.theta(0.1).unwrap() - 0.01).abs() < 1e-15);
        assert_eq!(classify(f64::INFINITY, 0.0, &one()).unwrap().kind(), RegimeKind::Classical);
    }

    #[test]
    fn theta_examples() {
        let r = classify(1.5, 0.0, &one()).unwrap();
        assert!((r.theta(0.1).unwrap() - libm::pow(0.1, 1.5)).abs() < 1e-15);
        assert!((r.theta(0.1).unwrap() - 0.031_622_776_6).abs() < 1e-10);
        let c = classify(1.5, 0.5, &one()).unwrap();
        assert!((c.theta(0.1).unwrap() - 0.01 * libm::log(10.0)).abs() < 1e-15);
        assert!(r.theta(1.0).is_err() && r.theta(0.0).is_err());
    }

    #[test]
    fn out_of_hypotheses_rejected() {
        assert!(matches!(classify(1.0, 1.0, &one()), Err(crate::Error::UnsupportedRegime(_))));
        assert!(matches!(classify(0.5, 0.6, &one()), Err(crate::Error::UnsupportedRegime(_))));
        assert!(matches!(classify(2.5, 1.2, &one()), Err(crate::Error::UnsupportedRegime(_))));
        assert!(matches!(classify(-1.0, -2.0, &one()), Err(crate::Error::UnsupportedRegime(_))));
    }

    #[test]
    fn gamma_monotone_in_beta() {
        for &alpha in &[0.3, 0.7, 1.0, 1.3, 1.8] {
            let hi = alpha.min(2.0 - alpha);
            let betas: Vec<f64> = (1..400).map(|i| -3.0 + (hi + 3.0) * i as f64 / 400.0).collect();
            let gammas: Vec<f64> = betas
                .iter()
                .map(|b| {
                    let r = classify(alpha, *b, &one()).unwrap();
                    assert_eq!(r.kind(), RegimeKind::Fractional);
                    assert!(r.gamma() > 0.0 && r.gamma() < 2.0);
                    r.gamma()
                })
                .collect();
            for w in gammas.windows(2) {
                if alpha < 1.0 {
                    assert!(w[1] < w[0]);
                } else if alpha > 1.0 {
                    assert!(w[1] > w[0]);
                } else {
                    assert_eq!(w[1], 1.0);
                }
            }
        }
        // γ → α as β → 0 and γ → 2 at the borderline
        assert!((gamma_of(1.3, 1e-9) - 1.3).abs() < 1e-8);
        assert!((gamma_of(1.3, 0.7 - 1e-9) - 2.0).abs() < 1e-7);
    }

    #[test]
    fn fractional_theta_over_power_is_phi() {
        let ell = SlowVaryingFn::power_log(0.5).unwrap();
        let r = classify(0.8, 0.2, &ell).unwrap();
        for eps in [0.3, 0.01, 1e-5] {
            let ratio = r.theta(eps).unwrap() / libm::pow(eps, r.gamma());
            assert!((ratio / r.phi(eps) - 1.0).abs() < 1e-14);
        }
    }
}
