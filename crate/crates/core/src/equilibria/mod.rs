//! Heavy-tailed equilibria `F(v) = F₀(v) ℓ(|v|)` with `|v|^{N+α} F₀ → κ₀`.
//!
//! An equilibrium is a radial profile: a bounded core below `r_cut` glued
//! continuously to the tail `κ₀ r^{-N-α} ℓ(r)`, divided by a normalization
//! constant computed once at construction. The core is either radially
//! uniform or a Gaussian; a Gaussian with `r_cut = ∞` is the Maxwellian used
//! for classical-limit experiments.

mod slowvar;
pub(crate) mod table;

pub use slowvar::{potter_check, PotterReport, SlowKind, SlowVaryingFn};

use crate::error::bail;
use crate::math::{self, ball_volume, check_dim, check_finite, norm, sphere_area};
#[allow(unused_imports)]
use crate::math::Float;
use crate::quadrature::{composite_rule, integrate_to_infinity, Tolerance};
use crate::{Result, Vector};
use alloc::vec::Vec;
use core::f64::consts::PI;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use table::CdfTable;

/// Shape of the equilibrium below the cut radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoreProfile {
    /// Constant density on `|v| < r_cut`, equal to the tail value at `r_cut`.
    Uniform,
    /// `A e^{-|v|²/2}` with `A` matching the tail at `r_cut`.
    Maxwellian,
}

/// Constructor arguments for [`HeavyTailEquilibrium`].
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSpec {
    pub dim: usize,
    pub alpha: f64,
    pub kappa0: f64,
    pub ell: SlowVaryingFn,
    pub r_cut: f64,
    pub core: CoreProfile,
    /// Pure power tail `κ₀|v|^{-N-α}` beyond `r_cut` (requires `ℓ ≡ 1`).
    pub tail_exact: bool,
}

impl EquilibriumSpec {
    /// Uniform core on the unit ball with an exact power tail.
    pub fn power_tail(dim: usize, alpha: f64, kappa0: f64) -> Self {
        Self {
            dim,
            alpha,
            kappa0,
            ell: SlowVaryingFn::one(),
            r_cut: 1.0,
            core: CoreProfile::Uniform,
            tail_exact: true,
        }
    }
}

/// Value of a velocity moment, with divergence kept symbolic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Moment {
    Finite(f64),
    Infinite,
}

impl Moment {
    pub fn is_finite(&self) -> bool {
        matches!(self, Moment::Finite(_))
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Moment::Finite(v) => Some(*v),
            Moment::Infinite => None,
        }
    }
}

/// A normalized, even, radial equilibrium distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct HeavyTailEquilibrium {
    dim: usize,
    alpha: f64,
    kappa0: f64,
    ell: SlowVaryingFn,
    r_cut: f64,
    core: CoreProfile,
    tail_exact: bool,
    core_amplitude: f64,
    norm: f64,
    core_mass: f64,
    tail_mass: f64,
    core_table: Option<CdfTable>,
    tail_table: Option<CdfTable>,
}

const NORM_NODES: usize = 64;
const TAIL_TOL: Tolerance = Tolerance::new(0.0, 1e-13);

impl HeavyTailEquilibrium {
    pub fn new(spec: EquilibriumSpec) -> Result<Self> {
        let EquilibriumSpec { dim, alpha, kappa0, ell, r_cut, core, tail_exact } = spec;
        check_dim(dim)?;
        if !(r_cut > 0.0) {
            bail!(InvalidInput, "r_cut must be positive, got {r_cut}");
        }
        if r_cut.is_infinite() && core != CoreProfile::Maxwellian {
            bail!(InvalidInput, "an infinite cut radius needs the Maxwellian core");
        }
        if r_cut.is_finite() && !(alpha > 0.0 && alpha.is_finite()) {
            bail!(InvalidInput, "tail index must be positive and finite, got {alpha}");
        }
        if r_cut.is_finite() && !(kappa0 > 0.0 && kappa0.is_finite()) {
            bail!(InvalidInput, "tail constant must be positive and finite, got {kappa0}");
        }
        if tail_exact && ell.as_constant() != Some(1.0) {
            bail!(InvalidInput, "an exact power tail requires ℓ ≡ 1");
        }
        let mut eq = Self {
            dim,
            alpha: if r_cut.is_finite() { alpha } else { f64::INFINITY },
            kappa0,
            ell,
            r_cut,
            core,
            tail_exact,
            core_amplitude: 0.0,
            norm: 1.0,
            core_mass: 0.0,
            tail_mass: 0.0,
            core_table: None,
            tail_table: None,
        };
        eq.core_amplitude = match (core, r_cut.is_finite()) {
            (_, false) => libm::pow(2.0 * PI, -(dim as f64) / 2.0),
            (CoreProfile::Uniform, true) => eq.tail_profile(r_cut),
            (CoreProfile::Maxwellian, true) => eq.tail_profile(r_cut) * libm::exp(0.5 * r_cut * r_cut),
        };
        eq.core_mass = eq.core_radial_moment(0.0);
        eq.tail_mass = if r_cut.is_finite() { eq.tail_radial_moment(0.0)? } else { 0.0 };
        eq.norm = eq.core_mass + eq.tail_mass;
        if !(eq.norm > 0.0 && eq.norm.is_finite()) {
            bail!(NumericalFailure, "normalization constant {}", eq.norm);
        }
        if core == CoreProfile::Maxwellian {
            let r_max = r_cut.min(40.0);
            let n = 2048;
            let xs: Vec<f64> = (0..=n).map(|i| r_max * i as f64 / n as f64).collect();
            let d = dim as f64;
            eq.core_table = Some(CdfTable::build(|r| libm::pow(r, d - 1.0) * libm::exp(-0.5 * r * r), xs));
        }
        if r_cut.is_finite() && eq.ell.as_constant().is_none() {
            let u_max = 40.0 / alpha;
            let n = 4096;
            let xs: Vec<f64> = (0..=n).map(|i| u_max * i as f64 / n as f64).collect();
            let (ell, a) = (&eq.ell, alpha);
            eq.tail_table = Some(CdfTable::build(|u| libm::exp(-a * u) * ell.eval(r_cut * libm::exp(u)), xs));
        }
        Ok(eq)
    }

    /// Standard Gaussian in `dim` dimensions (no tail).
    pub fn maxwellian(dim: usize) -> Result<Self> {
        Self::new(EquilibriumSpec {
            dim,
            alpha: f64::INFINITY,
            kappa0: 0.0,
            ell: SlowVaryingFn::one(),
            r_cut: f64::INFINITY,
            core: CoreProfile::Maxwellian,
            tail_exact: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Tail index α (infinite for the Maxwellian).
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }

    pub fn ell(&self) -> &SlowVaryingFn {
        &self.ell
    }

    pub fn r_cut(&self) -> f64 {
        self.r_cut
    }

    pub fn core(&self) -> CoreProfile {
        self.core
    }

    pub fn tail_exact(&self) -> bool {
        self.tail_exact
    }

    pub fn has_tail(&self) -> bool {
        self.r_cut.is_finite()
    }

    /// Normalization constant dividing the raw profile.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    /// Tail constant of the normalized distribution, `κ₀ / Z`.
    pub fn tail_constant(&self) -> f64 {
        if self.has_tail() { self.kappa0 / self.norm } else { 0.0 }
    }

    /// Probability of `|v| ≥ r_cut`.
    pub fn tail_fraction(&self) -> f64 {
        self.tail_mass / self.norm
    }

    fn tail_profile(&self, r: f64) -> f64 {
        self.kappa0 * libm::pow(r, -(self.dim as f64) - self.alpha) * self.ell.eval(r)
    }

    /// Raw (unnormalized) radial profile.
    pub fn profile(&self, r: f64) -> f64 {
        if r >= self.r_cut {
            self.tail_profile(r)
        } else {
            match self.core {
                CoreProfile::Uniform => self.core_amplitude,
                CoreProfile::Maxwellian => self.core_amplitude * libm::exp(-0.5 * r * r),
            }
        }
    }

    /// Normalized density as a function of `|v|`.
    pub fn density(&self, r: f64) -> f64 {
        self.profile(r) / self.norm
    }

    /// `F(v)`.
    pub fn eval_f(&self, v: &Vector) -> Result<f64> {
        check_finite(v)?;
        Ok(self.density(norm(v)))
    }

    /// `F(v)` before division by the normalization constant.
    pub fn eval_unnormalized(&self, v: &Vector) -> Result<f64> {
        check_finite(v)?;
        Ok(self.profile(norm(v)))
    }

    /// `|S| ∫_0^{r_cut} r^{a+N-1} profile(r) dr`.
    fn core_radial_moment(&self, a: f64) -> f64 {
        let d = self.dim as f64;
        let s = sphere_area(self.dim);
        match (self.core, self.r_cut.is_finite()) {
            (CoreProfile::Uniform, _) => s * self.core_amplitude * libm::pow(self.r_cut, d + a) / (d + a),
            (CoreProfile::Maxwellian, false) => {
                let h = (d + a) / 2.0;
                s * self.core_amplitude * libm::pow(2.0, h - 1.0) * math::gamma(h)
            }
            (CoreProfile::Maxwellian, true) => {
                let panels = (self.r_cut.ceil() as usize).max(1);
                let edges: Vec<f64> = (0..=panels).map(|i| self.r_cut * i as f64 / panels as f64).collect();
                let (x, w) = composite_rule(&edges, NORM_NODES);
                let sum: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(r, w)| w * libm::pow(*r, a + d - 1.0) * libm::exp(-0.5 * r * r))
                    .sum();
                s * self.core_amplitude * sum
            }
        }
    }

    /// `|S| ∫_{r_cut}^∞ r^{a+N-1} profile(r) dr` for `a < α` (or `a = α` with
    /// an integrable `ℓ(r)/r`).
    fn tail_radial_moment(&self, a: f64) -> Result<f64> {
        let s = sphere_area(self.dim);
        let lead = s * self.kappa0 * libm::pow(self.r_cut, a - self.alpha);
        if let Some(c) = self.ell.as_constant() {
            return Ok(lead * c / (self.alpha - a));
        }
        let (rc, ex) = (self.r_cut, a - self.alpha);
        let ell = &self.ell;
        let e = integrate_to_infinity(|u| libm::exp(ex * u) * ell.eval(rc * libm::exp(u)), 0.0, &[1.0, 10.0], TAIL_TOL)?;
        Ok(lead * e.value)
    }

    /// `∫ |v|^a F(v) dv`, infinite when the tail integral diverges.
    pub fn moment(&self, a: f64) -> Result<Moment> {
        if !(a >= 0.0) {
            bail!(InvalidInput, "moment order must be nonnegative, got {a}");
        }
        if a == 0.0 {
            return Ok(Moment::Finite(1.0));
        }
        let core = self.core_radial_moment(a);
        if !self.has_tail() {
            return Ok(Moment::Finite(core / self.norm));
        }
        if a > self.alpha || (a == self.alpha && self.ell.log_integral_diverges()) {
            return Ok(Moment::Infinite);
        }
        let tail = self.tail_radial_moment(a)?;
        Ok(Moment::Finite((core + tail) / self.norm))
    }

    /// `P(|V| ≤ r)`, evaluated directly (independently of the sampling tables).
    pub fn radial_cdf(&self, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Ok(0.0);
        }
        let d = self.dim as f64;
        let s = sphere_area(self.dim);
        let core_part = |rr: f64| -> f64 {
            match self.core {
                CoreProfile::Uniform => self.core_amplitude * ball_volume(self.dim, rr),
                CoreProfile::Maxwellian => {
                    let e = crate::quadrature::integrate(
                        |x| libm::pow(x, d - 1.0) * libm::exp(-0.5 * x * x),
                        &[0.0, rr.min(1.0), rr],
                        Tolerance::new(0.0, 1e-13),
                    );
                    s * self.core_amplitude * e.map(|e| e.value).unwrap_or(f64::NAN)
                }
            }
        };
        if r < self.r_cut {
            return Ok(core_part(r) / self.norm);
        }
        // above the cut: one minus the tail beyond r
        let beyond = if let Some(c) = self.ell.as_constant() {
            s * self.kappa0 * c * libm::pow(r, -self.alpha) / self.alpha
        } else {
            let (a, ell) = (self.alpha, &self.ell);
            s * self.kappa0
                * libm::pow(r, -a)
                * integrate_to_infinity(|u| libm::exp(-a * u) * ell.eval(r * libm::exp(u)), 0.0, &[1.0, 10.0], TAIL_TOL)?.value
        };
        Ok(1.0 - beyond / self.norm)
    }

    fn draw_radius<R: RngCore>(&self, rng: &mut R) -> f64 {
        let u = uniform(rng);
        let core_frac = self.core_mass / self.norm;
        if u < core_frac || !self.has_tail() {
            let uc = (u / core_frac).min(1.0);
            match &self.core_table {
                Some(t) => t.invert(uc),
                None => self.r_cut * libm::pow(uc, 1.0 / self.dim as f64),
            }
        } else {
            // upper-tail probability in (0, 1]
            let q = ((1.0 - u) / (1.0 - core_frac)).clamp(f64::MIN_POSITIVE, 1.0);
            match &self.tail_table {
                Some(t) => self.r_cut * libm::exp(t.invert(1.0 - q)),
                None => self.r_cut * libm::pow(q, -1.0 / self.alpha),
            }
        }
    }

    /// One draw from `F`.
    pub fn sample_one<R: RngCore>(&self, rng: &mut R) -> Vector {
        let r = self.draw_radius(rng);
        math::scale(&random_direction(self.dim, rng), r)
    }

    /// `n` i.i.d. draws from `F`, deterministic in `seed`.
    pub fn sample(&self, seed: u64, n: usize) -> Result<Vec<Vector>> {
        if n == 0 {
            bail!(InvalidInput, "sample count must be at least 1");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..n).map(|_| self.sample_one(&mut rng)).collect())
    }
}

/// Uniform draw in `[0, 1)` with 53 random bits.
pub(crate) fn uniform<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// Uniform point on the unit sphere of dimension `dim`.
pub(crate) fn random_direction<R: RngCore>(dim: usize, rng: &mut R) -> Vector {
    match dim {
        1 => {
            if rng.next_u32() & 1 == 0 { [1.0, 0.0, 0.0] } else { [-1.0, 0.0, 0.0] }
        }
        2 => {
            let phi = 2.0 * PI * uniform(rng);
            [libm::cos(phi), libm::sin(phi), 0.0]
        }
        _ => {
            let z = 2.0 * uniform(rng) - 1.0;
            let phi = 2.0 * PI * uniform(rng);
            let s = libm::sqrt((1.0 - z * z).max(0.0));
            [s * libm::cos(phi), s * libm::sin(phi), z]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn unit_tail(alpha: f64) -> HeavyTailEquilibrium {
        HeavyTailEquilibrium::new(EquilibriumSpec::power_tail(1, alpha, 1.0)).unwrap()
    }

    /// Full-line quadrature of a radial 1-D density, independent of the
    /// analytic normalization.
    fn brute_force_1d(eq: &HeavyTailEquilibrium, a: f64) -> f64 {
        let tol = Tolerance::new(0.0, 1e-12);
        let split = eq.r_cut().min(1.0);
        let core = integrate(|r| libm::pow(r, a) * eq.density(r), &[0.0, split], tol).unwrap().value;
        // r = e^u beyond the split keeps power tails smooth
        let tail = integrate_to_infinity(
            |u| {
                let r = libm::exp(u);
                libm::pow(r, a + 1.0) * eq.density(r)
            },
            libm::log(split),
            &[libm::log(eq.r_cut().max(split)), 5.0],
            tol,
        )
        .unwrap()
        .value;
        2.0 * (core + tail)
    }

    #[test]
    fn even_and_exact_tail() {
        let eq = unit_tail(1.0);
        for v in [0.3, 1.0, 2.5, 10.0, 1e4] {
            assert_eq!(eq.eval_f(&[v, 0.0, 0.0]).unwrap(), eq.eval_f(&[-v, 0.0, 0.0]).unwrap());
        }
        assert_eq!(eq.eval_unnormalized(&[10.0, 0.0, 0.0]).unwrap(), 0.01);
        for r in [1.0, 7.0, 1e5] {
            let scaled = libm::pow(r, 2.0) * eq.eval_unnormalized(&[r, 0.0, 0.0]).unwrap();
            assert!((scaled - 1.0).abs() < 1e-14);
        }
        assert!(eq.eval_f(&[f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn normalized_in_all_dimensions() {
        for dim in 1..=3 {
            for alpha in [0.5, 1.0, 1.5] {
                let eq = HeavyTailEquilibrium::new(EquilibriumSpec::power_tail(dim, alpha, 1.0)).unwrap();
                assert!((eq.moment(0.0).unwrap().value().unwrap() - 1.0).abs() < 1e-15);
                assert!((eq.radial_cdf(1e300).unwrap() - 1.0).abs() < 1e-12);
            }
        }
        let eq = unit_tail(0.7);
        assert!((brute_force_1d(&eq, 0.0) - 1.0).abs() < 1e-8);
        let spec = EquilibriumSpec {
            ell: SlowVaryingFn::power_log(1.0).unwrap(),
            core: CoreProfile::Maxwellian,
            r_cut: 2.0,
            tail_exact: false,
            ..EquilibriumSpec::power_tail(1, 1.3, 0.5)
        };
        let eq = HeavyTailEquilibrium::new(spec).unwrap();
        assert!((brute_force_1d(&eq, 0.0) - 1.0).abs() < 1e-8);
        let g = HeavyTailEquilibrium::maxwellian(1).unwrap();
        assert!((brute_force_1d(&g, 0.0) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn moments_finite_below_alpha_only() {
        let eq = unit_tail(1.0);
        assert_eq!(eq.moment(2.0).unwrap(), Moment::Infinite);
        assert_eq!(eq.moment(1.0).unwrap(), Moment::Infinite);
        assert!(eq.moment(0.99).unwrap().is_finite());
        assert!(eq.moment(-1.0).is_err());
        let g = HeavyTailEquilibrium::maxwellian(1).unwrap();
        assert!((g.moment(2.0).unwrap().value().unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn first_moment_closed_form() {
        // core 2·∫_0^1 r dr = 1, tail 2κ₀/(α-a) = 4, Z = 2 + 4/3
        let eq = unit_tail(1.5);
        let m = eq.moment(1.0).unwrap().value().unwrap();
        assert!((m - 1.5).abs() < 1e-12, "{m}");
        assert!((brute_force_1d(&eq, 1.0) - 1.5).abs() < 1e-8);
    }

    #[test]
    fn moment_at_alpha_with_decaying_log() {
        let spec = EquilibriumSpec {
            ell: SlowVaryingFn::power_log(-2.0).unwrap(),
            tail_exact: false,
            ..EquilibriumSpec::power_tail(1, 2.0, 1.0)
        };
        let eq = HeavyTailEquilibrium::new(spec).unwrap();
        assert!(eq.moment(2.0).unwrap().is_finite());
        assert_eq!(eq.moment(2.1).unwrap(), Moment::Infinite);
    }

    #[test]
    fn tail_exact_requires_unit_ell() {
        let spec = EquilibriumSpec { ell: SlowVaryingFn::iterated_log(), ..EquilibriumSpec::power_tail(1, 1.0, 1.0) };
        assert!(HeavyTailEquilibrium::new(spec).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let eq = unit_tail(1.5);
        assert_eq!(eq.sample(7, 100).unwrap(), eq.sample(7, 100).unwrap());
        assert_ne!(eq.sample(7, 100).unwrap(), eq.sample(8, 100).unwrap());
        assert!(eq.sample(1, 0).is_err());
    }
}
