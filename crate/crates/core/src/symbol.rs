//! The Laplace-Fourier symbol of the rescaled kinetic equation
//!
//! ```text
//! a^ε(p, k) = (1/θ) ∫ ( ν / (ν + θp + iε v·k) - 1 ) ν F dv
//! ```
//!
//! and the coefficient `κ` of its limit `-p - κ|k|^γ`.
//!
//! Everything is reduced to radial integrals: with `B = ν + θp` and
//! `A = ε|k||v|`, the angular averages of the integrand have closed forms in
//! dimensions 1 to 3. The radial integrals run in `ln|v|` with a breakpoint
//! at the core radius and at the transition radius
//! `r* = (ν₀/(ε|k|))^{1/(1-β)}`, where `ε|k| |v|^{1-β}` crosses `ν₀`.
//! Beyond `r*` the integrand is governed by the rescaled variable
//! `w = ε|k||v|^{-β} v`, which is what `κ` integrates.

use crate::collision::CollisionKernel;
use crate::error::bail;
use crate::math::{check_finite, loglog_slope, norm, sphere_abs_moment, sphere_area};
#[allow(unused_imports)]
use crate::math::Float;
use crate::quadrature::{half_line, integrate, integrate_to_infinity, Tolerance};
use crate::scaling::{RegimeKind, ScalingRegime};
use crate::{Result, Vector};
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

const RADIAL_TOL: Tolerance = Tolerance::new(0.0, 1e-10);
const ANGULAR_TOL: Tolerance = Tolerance::new(1e-300, 1e-12);

/// One evaluation of `a^ε(p, k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolValue {
    pub p: f64,
    pub k: Vector,
    pub eps: f64,
    pub theta: f64,
    /// Direct quadrature of the complex integrand.
    pub a_eps: Complex64,
    /// `p ∫ ν(ν+θp) / ((ν+θp)² + ε²(v·k)²) F dv ≥ 0`; the symbol carries it
    /// with a minus sign.
    pub drift: f64,
    /// The quadratic part `(1/θ) ∫ ε²(v·k)² ν / ((ν+θp)² + ε²(v·k)²) F dv`.
    pub d_eps: f64,
    /// `∫ |ν/(ν+θp+iεv·k) - 1| ν F dv`.
    pub c_remainder: f64,
}

impl SymbolValue {
    /// The drift term as it enters the symbol; tends to `-p`.
    pub fn drift_signed(&self) -> f64 {
        -self.drift
    }

    /// `-drift - d^ε`, the real part of the symbol assembled from its pieces.
    pub fn decomposed(&self) -> f64 {
        -self.drift - self.d_eps
    }

    /// `a^ε / ln(1/ε)`, the form in which the critical scale is visible when
    /// the symbol is evaluated on the classical time scale.
    pub fn per_log(&self) -> Complex64 {
        self.a_eps / libm::log(1.0 / self.eps)
    }
}

/// How [`KappaValue::kappa`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KappaMethod {
    Quadrature,
    ClosedForm,
}

impl KappaMethod {
    pub fn name(&self) -> &'static str {
        match self {
            KappaMethod::Quadrature => "quadrature",
            KappaMethod::ClosedForm => "closed-form",
        }
    }
}

/// Limit coefficient `κ` with both of its evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaValue {
    pub kappa: f64,
    pub kind: RegimeKind,
    /// Order `γ` of the limit operator.
    pub gamma: f64,
    pub method: KappaMethod,
    pub closed_form: Option<f64>,
    pub quadrature: Option<f64>,
}

impl KappaValue {
    /// `|quadrature/closed_form - 1|` when both exist.
    pub fn relative_gap(&self) -> Option<f64> {
        match (self.closed_form, self.quadrature) {
            (Some(c), Some(q)) => Some((q / c - 1.0).abs()),
            _ => None,
        }
    }

    /// A classical diffusion coefficient `D` (isotropic) in the same shape.
    pub fn classical(d: f64) -> Self {
        KappaValue {
            kappa: d,
            kind: RegimeKind::Classical,
            gamma: 2.0,
            method: KappaMethod::Quadrature,
            closed_form: None,
            quadrature: Some(d),
        }
    }
}

/// `∫_S A²ω₁² / (B² + A²ω₁²) dσ(ω)`, in closed form.
pub fn angular_quadratic(dim: usize, b: f64, a: f64) -> f64 {
    let a = a.abs();
    if a == 0.0 {
        return 0.0;
    }
    if b == 0.0 {
        return sphere_area(dim);
    }
    match dim {
        1 => 2.0 * a * a / (b * b + a * a),
        2 => {
            let h = libm::hypot(a, b);
            2.0 * PI * a * a / (h * (h + b))
        }
        _ => {
            let x = a / b;
            let frac = if x < 1e-2 {
                let x2 = x * x;
                x2 * (1.0 / 3.0 - x2 * (1.0 / 5.0 - x2 * (1.0 / 7.0 - x2 / 9.0)))
            } else {
                1.0 - libm::atan(x) / x
            };
            4.0 * PI * frac
        }
    }
}

/// `∫_S B² / (B² + A²ω₁²) dσ(ω)`, i.e. `|S|` minus [`angular_quadratic`],
/// without the cancellation when `A ≫ B`.
pub fn angular_complement(dim: usize, b: f64, a: f64) -> f64 {
    let a = a.abs();
    if a == 0.0 {
        return sphere_area(dim);
    }
    if b == 0.0 {
        return 0.0;
    }
    match dim {
        1 => 2.0 * b * b / (b * b + a * a),
        2 => 2.0 * PI * b / libm::hypot(a, b),
        _ => {
            if a < b {
                sphere_area(3) - angular_quadratic(3, b, a)
            } else {
                4.0 * PI * b / a * libm::atan(a / b)
            }
        }
    }
}

/// `∫_S g(ω₁) dσ(ω)` by adaptive quadrature, with breakpoints at `|ω₁| = c0`.
fn sphere_average<G: Fn(f64) -> f64>(dim: usize, c0: Option<f64>, g: G) -> Result<f64> {
    sphere_average_tol(dim, c0, g, ANGULAR_TOL)
}

fn sphere_average_tol<G: Fn(f64) -> f64>(dim: usize, c0: Option<f64>, g: G, tol: Tolerance) -> Result<f64> {
    match dim {
        1 => Ok(g(1.0) + g(-1.0)),
        2 => {
            let mut pts = alloc::vec![0.0, PI];
            if let Some(c) = c0.filter(|c| *c > 0.0 && *c < 1.0) {
                let t = libm::acos(c);
                pts.extend([t, PI - t, 0.5 * PI]);
                pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
            }
            Ok(2.0 * integrate(|t| g(libm::cos(t)), &pts, tol)?.value)
        }
        _ => {
            let mut pts = alloc::vec![-1.0, 1.0];
            if let Some(c) = c0.filter(|c| *c > 0.0 && *c < 1.0) {
                pts.extend([-c, 0.0, c]);
                pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
            }
            Ok(2.0 * PI * integrate(g, &pts, tol)?.value)
        }
    }
}

/// [`angular_quadratic`] by direct angular quadrature.
pub fn angular_quadratic_numeric(dim: usize, b: f64, a: f64) -> Result<f64> {
    let a = a.abs();
    sphere_average(dim, Some(b / a), |c| {
        let ac = a * c;
        ac * ac / (b * b + ac * ac)
    })
}

struct Setup<'a> {
    kernel: &'a CollisionKernel,
    dim: usize,
    p: f64,
    kn: f64,
    eps: f64,
    theta: f64,
    kinks: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl<'a> Setup<'a> {
    fn new(kernel: &'a CollisionKernel, regime: &ScalingRegime, p: f64, k: &Vector, eps: f64) -> Result<Self> {
        if !(p >= 0.0 && p.is_finite()) {
            bail!(InvalidInput, "Laplace variable p = {p} must be finite and ≥ 0");
        }
        check_finite(k)?;
        let theta = regime.theta(eps)?;
        let eq = kernel.equilibrium();
        let dim = eq.dim();
        if k[dim..].iter().any(|c| *c != 0.0) {
            bail!(InvalidInput, "wave vector {k:?} has components beyond dimension {dim}");
        }
        let kn = norm(k);
        let rc = eq.r_cut().min(1e6);
        let mut kinks = Vec::new();
        let mut lo = 1e-3 * rc.min(1.0);
        let mut hi = 1e3 * rc.max(1.0);
        if rc.is_finite() {
            kinks.push(rc);
        }
        if kn > 0.0 {
            let beta = kernel.beta();
            let star = libm::pow(kernel.nu0() / (eps * kn), 1.0 / (1.0 - beta));
            if star.is_finite() && star > 0.0 {
                kinks.push(star);
                lo = lo.min(1e-3 * star);
                hi = hi.max(1e3 * star);
            }
        }
        // decade breakpoints keep every panel within one order of magnitude
        let mut t = 10.0 * lo;
        while t < hi {
            kinks.push(t);
            t *= 10.0;
        }
        kinks.sort_by(|x, y| x.partial_cmp(y).unwrap());
        Ok(Setup { kernel, dim, p, kn, eps, theta, kinks, lo, hi })
    }

    /// `r^{N-1} ν F`, with the sphere factor left to the angular part.
    fn weight(&self, r: f64) -> (f64, f64) {
        let nu = self.kernel.nu_fast(r);
        let f = self.kernel.equilibrium().density(r);
        (nu, libm::pow(r, (self.dim - 1) as f64) * nu * f)
    }

    fn radial<H: Fn(f64) -> f64>(&self, what: &str, h: H) -> Result<f64> {
        let res = half_line(h, self.lo, self.hi, &self.kinks, RADIAL_TOL)?;
        if !res.converged() {
            bail!(
                NumericalFailure,
                "{what} integral does not converge (near 0: {}, at large |v|: {})",
                res.diverges_at_zero,
                res.diverges_at_infinity
            );
        }
        Ok(res.value)
    }

    fn drift(&self) -> Result<f64> {
        if self.p == 0.0 {
            return Ok(0.0);
        }
        let v = self.radial("drift", |r| {
            let (nu, w) = self.weight(r);
            let b = nu + self.theta * self.p;
            w * angular_complement(self.dim, b, self.eps * self.kn * r) / b
        })?;
        Ok(self.p * v)
    }

    fn d_eps(&self) -> Result<f64> {
        if self.kn == 0.0 {
            return Ok(0.0);
        }
        let v = self.radial("quadratic part", |r| {
            let (nu, w) = self.weight(r);
            let b = nu + self.theta * self.p;
            w * angular_quadratic(self.dim, b, self.eps * self.kn * r)
        })?;
        Ok(v / self.theta)
    }

    /// Angular integral of `z/(ν+z)` with `z = θp + i a ω₁`.
    fn angular_ratio(&self, nu: f64, a: f64) -> Result<Complex64> {
        let tp = self.theta * self.p;
        let z = |c: f64| {
            let zz = Complex64::new(tp, a * c);
            zz / (nu + zz)
        };
        let c0 = if a > 0.0 { Some((nu + tp) / a) } else { None };
        let re = sphere_average(self.dim, c0, |c| z(c).re)?;
        // odd in ω₁, bounded by 1/2: integrates to rounding noise
        let im = sphere_average_tol(self.dim, c0, |c| z(c).im, Tolerance::new(1e-13, 1e-12))?;
        Ok(Complex64::new(re, im))
    }

    fn a_direct(&self) -> Result<Complex64> {
        let fail = core::cell::Cell::new(None);
        let part = |imag: bool| {
            let fail = &fail;
            move |r: f64| {
                let (nu, w) = self.weight(r);
                match self.angular_ratio(nu, self.eps * self.kn * r) {
                    Ok(z) => w * if imag { z.im } else { z.re },
                    Err(e) => {
                        fail.set(Some(e));
                        0.0
                    }
                }
            }
        };
        let re = if self.p == 0.0 && self.kn == 0.0 {
            0.0
        } else {
            self.radial("symbol", part(false))?
        };
        // the odd part integrates to rounding noise: no convergence verdict
        let tol = Tolerance::new(1e-13 * re.abs().max(f64::MIN_POSITIVE), 1e-10);
        let im = half_line(part(true), self.lo, self.hi, &self.kinks, tol)?.value;
        if let Some(e) = fail.take() {
            return Err(e);
        }
        Ok(-Complex64::new(re, im) / self.theta)
    }

    fn c_remainder(&self) -> Result<f64> {
        if self.p == 0.0 && self.kn == 0.0 {
            return Ok(0.0);
        }
        let fail = core::cell::Cell::new(None);
        let tp = self.theta * self.p;
        let v = self.radial("remainder", |r| {
            let (nu, w) = self.weight(r);
            let a = self.eps * self.kn * r;
            let b = nu + tp;
            let c0 = if a > 0.0 { Some(b / a) } else { None };
            let g = sphere_average(self.dim, c0, |c| {
                let ac = a * c;
                libm::sqrt((tp * tp + ac * ac) / (b * b + ac * ac))
            });
            match g {
                Ok(g) => w * g,
                Err(e) => {
                    fail.set(Some(e));
                    0.0
                }
            }
        })?;
        if let Some(e) = fail.take() {
            return Err(e);
        }
        Ok(v)
    }
}

/// Evaluates `a^ε(p, k)` and its pieces.
pub fn a_eps(kernel: &CollisionKernel, regime: &ScalingRegime, p: f64, k: &Vector, eps: f64) -> Result<SymbolValue> {
    let s = Setup::new(kernel, regime, p, k, eps)?;
    Ok(SymbolValue {
        p,
        k: *k,
        eps,
        theta: s.theta,
        a_eps: s.a_direct()?,
        drift: s.drift()?,
        d_eps: s.d_eps()?,
        c_remainder: s.c_remainder()?,
    })
}

/// The quadratic part `d^ε(p, k)` alone.
pub fn d_eps(kernel: &CollisionKernel, regime: &ScalingRegime, p: f64, k: &Vector, eps: f64) -> Result<f64> {
    Setup::new(kernel, regime, p, k, eps)?.d_eps()
}

/// The drift part (nonnegative) alone.
pub fn drift(kernel: &CollisionKernel, regime: &ScalingRegime, p: f64, k: &Vector, eps: f64) -> Result<f64> {
    Setup::new(kernel, regime, p, k, eps)?.drift()
}

/// The remainder integral `c^ε` alone.
pub fn c_remainder(kernel: &CollisionKernel, regime: &ScalingRegime, p: f64, k: &Vector, eps: f64) -> Result<f64> {
    Setup::new(kernel, regime, p, k, eps)?.c_remainder()
}

fn check_tail_inputs(kappa0: f64, nu0: f64, dim: usize) -> Result<()> {
    crate::math::check_dim(dim)?;
    if !(kappa0 > 0.0 && kappa0.is_finite()) {
        bail!(InvalidInput, "tail constant κ₀ = {kappa0} must be positive");
    }
    if !(nu0 > 0.0 && nu0.is_finite()) {
        bail!(InvalidInput, "frequency constant ν₀ = {nu0} must be positive");
    }
    Ok(())
}

/// `∫_0^∞ ρ^{-1-γ} J(ν₀, ρ) dρ` with `J` the numeric angular average, in
/// `ln ρ` on `[ν₀ 10⁻⁶, ν₀ 10⁸]` and with the leading-order tails added
/// analytically.
fn fractional_radial(dim: usize, gamma: f64, nu0: f64) -> Result<f64> {
    let (lo, hi) = (nu0 * 1e-6, nu0 * 1e8);
    let fail = core::cell::Cell::new(None);
    let h = |t: f64| {
        let rho = libm::exp(t);
        match angular_quadratic_numeric(dim, nu0, rho) {
            Ok(j) => libm::pow(rho, -gamma) * j,
            Err(e) => {
                fail.set(Some(e));
                0.0
            }
        }
    };
    let mut pts: Vec<f64> = (0..=14).map(|j| libm::log(lo) + j as f64 * libm::log(10.0)).collect();
    pts.push(libm::log(nu0));
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let middle = integrate(h, &pts, Tolerance::new(0.0, 1e-11))?.value;
    if let Some(e) = fail.take() {
        return Err(e);
    }
    // J ≈ ρ² ∫ω₁²/ν₀² near 0 and J ≈ |S| at infinity
    let s2 = sphere_area(dim) / dim as f64;
    let below = s2 / (nu0 * nu0) * libm::pow(lo, 2.0 - gamma) / (2.0 - gamma);
    let above = sphere_area(dim) * libm::pow(hi, -gamma) / gamma;
    Ok(middle + below + above)
}

/// `κ` of the fractional regime for the tail constant `κ₀` of `F` and the
/// frequency constant `ν₀`:
/// `κ = κ₀ν₀/(1-β) ∫ w₁²/(ν₀² + w₁²) |w|^{-N-γ} dw`.
///
/// The quadrature runs radially and angularly; the closed form is
/// `κ₀ ν₀^{1-γ}/(1-β) · (π/2)/sin(πγ/2) · ∫_S |ω₁|^γ dσ`.
pub fn kappa_fractional(regime: &ScalingRegime, kappa0: f64, nu0: f64, dim: usize) -> Result<KappaValue> {
    if regime.kind() != RegimeKind::Fractional {
        bail!(UnsupportedRegime, "κ of the fractional limit requested in the {} regime", regime.kind().name());
    }
    check_tail_inputs(kappa0, nu0, dim)?;
    let gamma = regime.gamma();
    if !(gamma > 0.0 && gamma < 2.0) {
        bail!(UnsupportedRegime, "γ = {gamma} outside (0, 2)");
    }
    let pre = kappa0 * nu0 / (1.0 - regime.beta());
    let quad = pre * fractional_radial(dim, gamma, nu0)?;
    let closed = kappa0 * libm::pow(nu0, 1.0 - gamma) / (1.0 - regime.beta()) * (0.5 * PI)
        / libm::sin(0.5 * PI * gamma)
        * sphere_abs_moment(dim, gamma);
    Ok(KappaValue {
        kappa: closed,
        kind: RegimeKind::Fractional,
        gamma,
        method: KappaMethod::ClosedForm,
        closed_form: Some(closed),
        quadrature: Some(quad),
    })
}

/// `ψ(λ) = ∫_{|w| ≥ λ} w₁²/(ν₀² + w₁²) κ₀ν₀ |w|^{-N-2} dw`, the truncated
/// integral whose logarithmic growth defines the critical `κ`.
pub fn critical_psi(lambda: f64, kappa0: f64, nu0: f64, dim: usize) -> Result<f64> {
    check_tail_inputs(kappa0, nu0, dim)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        bail!(InvalidInput, "cut-off λ = {lambda} must be positive");
    }
    let hi = nu0 * 1e8;
    if lambda >= hi {
        return Ok(kappa0 * nu0 * sphere_area(dim) / (2.0 * lambda * lambda));
    }
    let fail = core::cell::Cell::new(None);
    let h = |t: f64| {
        let rho = libm::exp(t);
        match angular_quadratic_numeric(dim, nu0, rho) {
            Ok(j) => j / (rho * rho),
            Err(e) => {
                fail.set(Some(e));
                0.0
            }
        }
    };
    let (a, b) = (libm::log(lambda), libm::log(hi));
    let n = ((b - a) / libm::log(10.0)).ceil().max(1.0) as usize;
    let mut pts: Vec<f64> = (0..=n).map(|j| a + (b - a) * j as f64 / n as f64).collect();
    if nu0 > lambda {
        pts.push(libm::log(nu0));
        pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    }
    let middle = integrate(h, &pts, Tolerance::new(0.0, 1e-11))?.value;
    if let Some(e) = fail.take() {
        return Err(e);
    }
    let tail = integrate_to_infinity(
        |rho| angular_quadratic(dim, nu0, rho) / (rho * rho * rho),
        hi,
        &[],
        Tolerance::new(0.0, 1e-10),
    )?
    .value;
    Ok(kappa0 * nu0 * (middle + tail))
}

/// `κ` of the critical regime `β = 2 - α`.
///
/// The closed form is `κ₀/((1-β)ν₀) ∫_S ω₁² dσ`. The quadrature estimate is
/// the slope of `ψ(λ)` against `(1-β) ln(1/λ)` between `λ = 10⁻⁵` and
/// `λ = 10⁻⁷`, the derivative form in which the limit
/// `ψ(λ)/((1-β) ln(1/λ))` is evaluated by L'Hôpital's rule.
pub fn kappa_critical(alpha: f64, beta: f64, kappa0: f64, nu0: f64, dim: usize) -> Result<KappaValue> {
    if !(alpha > 1.0 && alpha < 2.0) || (beta - (2.0 - alpha)).abs() > 1e-12 {
        bail!(UnsupportedRegime, "(α, β) = ({alpha}, {beta}) is not on the critical line β = 2 - α, 1 < α < 2");
    }
    check_tail_inputs(kappa0, nu0, dim)?;
    let closed = kappa0 / ((1.0 - beta) * nu0) * sphere_area(dim) / dim as f64;
    let (l1, l2) = (1e-5, 1e-7);
    let slope = (critical_psi(l2, kappa0, nu0, dim)? - critical_psi(l1, kappa0, nu0, dim)?)
        / ((1.0 - beta) * libm::log(l1 / l2));
    Ok(KappaValue {
        kappa: closed,
        kind: RegimeKind::Critical,
        gamma: 2.0,
        method: KappaMethod::ClosedForm,
        closed_form: Some(closed),
        quadrature: Some(slope),
    })
}

/// `ψ(λ)/((1-β) ln(1/λ))` along a sweep of cut-offs.
pub fn critical_sweep(lambdas: &[f64], beta: f64, kappa0: f64, nu0: f64, dim: usize) -> Result<Vec<f64>> {
    lambdas
        .iter()
        .map(|&l| Ok(critical_psi(l, kappa0, nu0, dim)? / ((1.0 - beta) * libm::log(1.0 / l))))
        .collect()
}

/// `κ` for a kernel in the given regime, using the tail constant of its
/// normalized equilibrium and its measured `ν₀`. The classical regime has
/// no scalar `κ` from the tail; use the cell problem.
pub fn kappa_for(kernel: &CollisionKernel, regime: &ScalingRegime) -> Result<KappaValue> {
    let eq = kernel.equilibrium();
    match regime.kind() {
        RegimeKind::Fractional => kappa_fractional(regime, eq.tail_constant(), kernel.nu0(), eq.dim()),
        RegimeKind::Critical => {
            kappa_critical(regime.alpha(), regime.beta(), eq.tail_constant(), kernel.nu0(), eq.dim())
        }
        RegimeKind::Classical => bail!(
            UnsupportedRegime,
            "the classical limit coefficient comes from the cell problem, not from the tail"
        ),
    }
}

/// `-p - κ|k|^γ`.
pub fn limit_symbol(kappa: &KappaValue, p: f64, k: &Vector) -> f64 {
    -p - kappa.kappa * libm::pow(norm(k), kappa.gamma)
}

/// Measured decay of the remainder `c^ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct RemainderReport {
    pub eps: Vec<f64>,
    pub c: Vec<f64>,
    /// Least-squares slope of `ln c^ε` against `ln ε` (`+∞` when `c^ε ≡ 0`).
    pub slope: f64,
    /// `min(γ/2, 1) - 0.02`.
    pub floor: f64,
    pub pass: bool,
}

/// Evaluates `c^ε` along `eps_list` and compares its decay rate with
/// `min(γ/2, 1)`.
pub fn remainder_probe(
    kernel: &CollisionKernel,
    regime: &ScalingRegime,
    p: f64,
    k: &Vector,
    eps_list: &[f64],
) -> Result<RemainderReport> {
    if regime.kind() == RegimeKind::Classical {
        bail!(UnsupportedRegime, "the remainder bound is stated for the fractional and critical regimes");
    }
    if eps_list.len() < 2 {
        bail!(InvalidInput, "need at least two values of ε");
    }
    let c = crate::par::map_range(eps_list.len(), |i| c_remainder(kernel, regime, p, k, eps_list[i]))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let slope = if c.iter().all(|x| *x == 0.0) {
        f64::INFINITY
    } else if c.iter().any(|x| *x <= 0.0) {
        bail!(NumericalFailure, "remainder vanishes on part of the ε grid: {c:?}");
    } else {
        loglog_slope(eps_list, &c)
    };
    let floor = (0.5 * regime.gamma()).min(1.0) - 0.02;
    Ok(RemainderReport { eps: eps_list.to_vec(), c, slope, floor, pass: slope >= floor })
}

#[cfg(test)]
mod tests;
