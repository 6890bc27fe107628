//! Linear collision operators `L(f) = K(f) - ν f` balanced against a given
//! equilibrium.
//!
//! Every kernel is written in detailed-balance form `σ(v, v') = b(v, v') F(v)`
//! with a symmetric `b`; BGK is the case `b ≡ 1`, for which `ν ≡ 1`.
//! [`CollisionKernel`] works with the continuous equilibrium (frequency,
//! the integral bounds of the coercivity lemma); [`DiscreteOperator`] is the
//! operator restricted to a [`VelocityGrid`].

mod discrete;
mod grid;

pub use discrete::{CellProblemSolution, CoercivityReport, DiscreteOperator};
pub use grid::{GridSpec, VelocityGrid};

use crate::equilibria::HeavyTailEquilibrium;
use crate::error::bail;
use crate::math::{bracket, check_finite, geomspace, norm, sphere_area};
#[allow(unused_imports)]
use crate::math::Float;
use crate::quadrature::{half_line, integrate, HalfLine, Tolerance};
use crate::{Result, Vector};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Shape of the symmetric factor `b(v, v')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// `b ≡ 1` (linear relaxation).
    Bgk,
    /// `⟨v⟩^β ⟨v'⟩^β`.
    Separable,
    /// `⟨v - v'⟩^β`.
    Shifted,
    /// `|v - v'|^β`.
    Physical,
}

impl KernelKind {
    pub fn name(&self) -> &'static str {
        match self {
            KernelKind::Bgk => "bgk",
            KernelKind::Separable => "separable",
            KernelKind::Shifted => "shifted",
            KernelKind::Physical => "physical",
        }
    }
}

impl core::str::FromStr for KernelKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "bgk" => KernelKind::Bgk,
            "separable" => KernelKind::Separable,
            "shifted" => KernelKind::Shifted,
            "physical" => KernelKind::Physical,
            _ => bail!(InvalidInput, "unknown kernel kind `{s}`"),
        })
    }
}

/// Which of the bounds of the coercivity assumption is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum B3Mode {
    /// `∫F'ν/b dv' + (∫F'/ν' b²/ν² dv')^{1/2}` (anomalous regimes).
    Anomalous,
    /// `∫(ν/b + |v'|²/ν') F' dv'` (classical regime).
    Classical,
}

/// Integral that failed to converge in a bound check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum B3Integral {
    /// `∫ F' ν / b dv'`
    InverseKernel,
    /// `∫ F'/ν' · b²/ν² dv'`
    SquaredKernel,
    /// `∫ |v'|² F'/ν' dv'`
    SecondMoment,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct B3Divergence {
    pub integral: B3Integral,
    /// `|v|` of the probe at which it happened.
    pub probe: f64,
    /// Divergence at `v' = v` (otherwise at `|v'| → ∞`).
    pub at_coincidence: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct B3Report {
    /// Supremum of the bound over the probes (infinite on divergence).
    pub m_observed: f64,
    /// `(|v|, value)` per probe.
    pub probes: Vec<(f64, f64)>,
    pub divergence: Option<B3Divergence>,
    pub pass: bool,
}

/// `ln(ν(r)/⟨r⟩^β)` on a logarithmic radius grid.
#[derive(Debug, Clone, PartialEq)]
struct NuTable {
    t0: f64,
    dt: f64,
    q: Vec<f64>,
    q_origin: f64,
}

const TABLE_R_MIN: f64 = 1e-3;
const TABLE_R_MAX: f64 = 1e8;
const TABLE_PER_DECADE: usize = 20;

impl NuTable {
    fn eval(&self, r: f64) -> f64 {
        let n = self.q.len();
        if r < TABLE_R_MIN {
            let s = r / TABLE_R_MIN;
            return self.q_origin + (self.q[0] - self.q_origin) * s;
        }
        let x = (libm::log(r) - self.t0) / self.dt;
        if x >= (n - 1) as f64 {
            return self.q[n - 1];
        }
        let i = x.floor() as usize;
        let u = x - i as f64;
        let at = |j: isize| self.q[j.clamp(0, n as isize - 1) as usize];
        let (p0, p1, p2, p3) = (at(i as isize - 1), at(i as isize), at(i as isize + 1), at(i as isize + 2));
        // Catmull-Rom
        let a = -0.5 * p0 + 1.5 * p1 - 1.5 * p2 + 0.5 * p3;
        let b = p0 - 2.5 * p1 + 2.0 * p2 - 0.5 * p3;
        let c = -0.5 * p0 + 0.5 * p2;
        ((a * u + b) * u + c) * u + p1
    }
}

const NU_TOL: Tolerance = Tolerance::new(0.0, 1e-9);

/// `σ(v, v') = b(v, v') F(v)` for one of the shipped `b`, balanced against a
/// fixed equilibrium.
#[derive(Debug, Clone)]
pub struct CollisionKernel {
    kind: KernelKind,
    beta: f64,
    eq: Arc<HeavyTailEquilibrium>,
    unchecked: bool,
    separable_mass: f64,
    table: Option<NuTable>,
    nu0: f64,
}

impl CollisionKernel {
    /// BGK kernel `σ(v, v') = F(v)`.
    pub fn bgk(eq: Arc<HeavyTailEquilibrium>) -> Self {
        Self {
            kind: KernelKind::Bgk,
            beta: 0.0,
            eq,
            unchecked: false,
            separable_mass: 1.0,
            table: None,
            nu0: 1.0,
        }
    }

    /// Kernel of the given kind; `β` must lie in the window where the
    /// frequency is finite and the coercivity bounds hold.
    pub fn new(eq: Arc<HeavyTailEquilibrium>, kind: KernelKind, beta: f64) -> Result<Self> {
        let (lo, hi) = Self::beta_window(kind, eq.alpha(), eq.dim());
        if kind == KernelKind::Bgk && beta != 0.0 {
            bail!(InvalidInput, "the BGK kernel has ν ≡ 1, so β must be 0 (got {beta})");
        }
        if kind != KernelKind::Bgk && !(beta > lo && beta < hi) {
            bail!(
                InvalidInput,
                "β = {beta} outside the admissible window ({lo}, {hi}) for the {} kernel",
                kind.name()
            );
        }
        Self::build(eq, kind, beta, false)
    }

    /// Kernel without the β-window check, for divergence demonstrations.
    /// The frequency table is left empty if `ν` itself diverges.
    pub fn new_unchecked(eq: Arc<HeavyTailEquilibrium>, kind: KernelKind, beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            bail!(InvalidInput, "β must be finite");
        }
        Self::build(eq, kind, beta, true)
    }

    /// `(lo, hi)` open window of admissible β.
    pub fn beta_window(kind: KernelKind, alpha: f64, dim: usize) -> (f64, f64) {
        let n = dim as f64;
        match kind {
            KernelKind::Bgk => (0.0, 0.0),
            KernelKind::Separable | KernelKind::Shifted => (f64::NEG_INFINITY, alpha),
            KernelKind::Physical => (-alpha.min(n / 2.0), alpha.min(n)),
        }
    }

    fn build(eq: Arc<HeavyTailEquilibrium>, kind: KernelKind, beta: f64, unchecked: bool) -> Result<Self> {
        let mut k = Self {
            kind,
            beta,
            eq,
            unchecked,
            separable_mass: 1.0,
            table: None,
            nu0: 1.0,
        };
        match kind {
            KernelKind::Bgk => {
                if beta != 0.0 {
                    bail!(InvalidInput, "the BGK kernel has β = 0");
                }
            }
            KernelKind::Separable => {
                let eq = &k.eq;
                let m = polar_about(eq, 0.0, |_, rho| libm::pow(bracket(rho), beta) * eq.density(rho))?;
                if m.converged() {
                    k.separable_mass = m.value;
                    k.nu0 = m.value;
                } else if !unchecked {
                    bail!(NumericalFailure, "∫⟨v⟩^β F dv diverges for β = {beta}");
                } else {
                    k.separable_mass = f64::INFINITY;
                    k.nu0 = f64::INFINITY;
                }
            }
            KernelKind::Shifted | KernelKind::Physical => match k.build_table() {
                Ok(t) => {
                    k.table = Some(t);
                    k.nu0 = k.measure_nu0()?;
                }
                Err(_) if unchecked => k.nu0 = f64::INFINITY,
                Err(e) => return Err(e),
            },
        }
        Ok(k)
    }

    /// Replaces the measured `ν₀` by a supplied value.
    pub fn with_nu0(mut self, nu0: f64) -> Result<Self> {
        if !(nu0 > 0.0 && nu0.is_finite()) {
            bail!(InvalidInput, "ν₀ must be positive and finite");
        }
        self.nu0 = nu0;
        Ok(self)
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn nu0(&self) -> f64 {
        self.nu0
    }

    pub fn equilibrium(&self) -> &HeavyTailEquilibrium {
        &self.eq
    }

    pub fn equilibrium_arc(&self) -> &Arc<HeavyTailEquilibrium> {
        &self.eq
    }

    pub fn is_unchecked(&self) -> bool {
        self.unchecked
    }

    /// `b` for `|v| = r`, `|v - v'| = s`, `|v'| = rho`.
    pub fn b_polar(&self, r: f64, s: f64, rho: f64) -> f64 {
        match self.kind {
            KernelKind::Bgk => 1.0,
            KernelKind::Separable => libm::pow(bracket(r) * bracket(rho), self.beta),
            KernelKind::Shifted => libm::pow(bracket(s), self.beta),
            KernelKind::Physical => libm::pow(s, self.beta),
        }
    }

    /// `b(v, v')`.
    pub fn b(&self, v: &Vector, w: &Vector) -> f64 {
        let d = [v[0] - w[0], v[1] - w[1], v[2] - w[2]];
        self.b_polar(norm(v), norm(&d), norm(w))
    }

    /// Collision frequency `ν(v) = ∫ σ(v', v) dv'` by direct quadrature.
    pub fn nu(&self, v: &Vector) -> Result<f64> {
        check_finite(v)?;
        self.nu_radial(norm(v))
    }

    pub fn nu_radial(&self, r: f64) -> Result<f64> {
        match self.kind {
            KernelKind::Bgk => Ok(1.0),
            KernelKind::Separable => Ok(self.separable_mass * libm::pow(bracket(r), self.beta)),
            _ => {
                let eq = &*self.eq;
                let res = polar_about(eq, r, |s, rho| self.b_polar(r, s, rho) * eq.density(rho))?;
                if !res.converged() {
                    bail!(
                        NumericalFailure,
                        "collision frequency integral diverges at |v| = {r} (at v' = v: {}, at infinity: {})",
                        res.diverges_at_zero,
                        res.diverges_at_infinity
                    );
                }
                Ok(res.value)
            }
        }
    }

    /// Interpolated frequency (tabulated at construction); exact for BGK and
    /// the separable kernel.
    pub fn nu_fast(&self, r: f64) -> f64 {
        match (&self.table, self.kind) {
            (Some(t), _) => libm::exp(t.eval(r)) * libm::pow(bracket(r), self.beta),
            (None, KernelKind::Bgk) => 1.0,
            (None, KernelKind::Separable) => self.separable_mass * libm::pow(bracket(r), self.beta),
            (None, _) => f64::INFINITY,
        }
    }

    fn build_table(&self) -> Result<NuTable> {
        let decades = libm::log10(TABLE_R_MAX / TABLE_R_MIN);
        let n = (decades * TABLE_PER_DECADE as f64).round() as usize + 1;
        let radii = geomspace(TABLE_R_MIN, TABLE_R_MAX, n);
        let vals = crate::par::map_range(n + 1, |i| {
            let r = if i == 0 { 0.0 } else { radii[i - 1] };
            self.nu_radial(r).map(|nu| libm::log(nu / libm::pow(bracket(r), self.beta)))
        });
        let mut q = Vec::with_capacity(n);
        let mut q_origin = 0.0;
        for (i, v) in vals.into_iter().enumerate() {
            let v = v?;
            if i == 0 {
                q_origin = v;
            } else {
                q.push(v);
            }
        }
        Ok(NuTable {
            t0: libm::log(TABLE_R_MIN),
            dt: (libm::log(TABLE_R_MAX) - libm::log(TABLE_R_MIN)) / (n - 1) as f64,
            q,
            q_origin,
        })
    }

    /// Median of `|v|^{-β} ν(v)` over radii in `[10², 10⁴]`.
    fn measure_nu0(&self) -> Result<f64> {
        let mut vals: Vec<f64> = geomspace(1e2, 1e4, 31)
            .into_iter()
            .map(|r| self.nu_radial(r).map(|nu| nu * libm::pow(r, -self.beta)))
            .collect::<Result<_>>()?;
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(vals[vals.len() / 2])
    }

    /// Evaluates the coercivity bounds at each probe velocity.
    pub fn b3_check(&self, probes: &[Vector], mode: B3Mode) -> Result<B3Report> {
        if probes.is_empty() {
            bail!(InvalidInput, "b3_check needs at least one probe");
        }
        let eq = &*self.eq;
        let mut out = Vec::with_capacity(probes.len());
        let mut divergence = None;
        let diverged = |h: &HalfLine, integral, probe| {
            if h.converged() {
                None
            } else {
                Some(B3Divergence { integral, probe, at_coincidence: h.diverges_at_zero })
            }
        };
        for v in probes {
            check_finite(v)?;
            let r = norm(v);
            let nu_v = self.nu_fast(r);
            if !nu_v.is_finite() {
                divergence = Some(B3Divergence { integral: B3Integral::InverseKernel, probe: r, at_coincidence: false });
                out.push((r, f64::INFINITY));
                break;
            }
            let inv = polar_about(eq, r, |s, rho| eq.density(rho) / self.b_polar(r, s, rho))?;
            let value;
            match mode {
                B3Mode::Anomalous => {
                    let sq = polar_about(eq, r, |s, rho| {
                        let b = self.b_polar(r, s, rho);
                        eq.density(rho) / self.nu_fast(rho) * b * b
                    })?;
                    divergence = diverged(&inv, B3Integral::InverseKernel, r)
                        .or_else(|| diverged(&sq, B3Integral::SquaredKernel, r));
                    value = nu_v * inv.value + libm::sqrt(sq.value) / nu_v;
                }
                B3Mode::Classical => {
                    let mom = polar_about(eq, r, |_, rho| rho * rho * eq.density(rho) / self.nu_fast(rho))?;
                    divergence = diverged(&inv, B3Integral::InverseKernel, r)
                        .or_else(|| diverged(&mom, B3Integral::SecondMoment, r));
                    value = nu_v * inv.value + mom.value;
                }
            }
            if divergence.is_some() {
                out.push((r, f64::INFINITY));
                break;
            }
            out.push((r, value));
        }
        let m_observed = out.iter().map(|p| p.1).fold(0.0, f64::max);
        let pass = divergence.is_none() && m_observed.is_finite();
        Ok(B3Report { m_observed, probes: out, divergence, pass })
    }
}

/// `∫_{S^{N-1}} g(|r e₁ + s ω|) dσ(ω)`, with a breakpoint where the
/// argument crosses `kink`.
fn sphere_integral<G: Fn(f64) -> f64>(dim: usize, r: f64, s: f64, kink: f64, g: &G) -> Result<f64> {
    if dim == 1 {
        return Ok(g(r + s) + g((r - s).abs()));
    }
    if r == 0.0 || s == 0.0 {
        return Ok(sphere_area(dim) * g(r + s));
    }
    let tol = Tolerance::new(0.0, 1e-11);
    // Angles are measured from the direction pointing back at the origin,
    // which keeps ρ² = (r-s)² + 4rs sin²(u/2) free of cancellation.
    let d2 = (r - s) * (r - s);
    let rs = r * s;
    // crossing of ρ = kink, and the scale u₀ on which ρ varies near u = 0
    let cross = (kink * kink - d2) / (4.0 * rs);
    let u0 = (r - s).abs().max(kink.min(r + s)).max(1e-300) / libm::sqrt(rs);
    let mut grading: Vec<f64> = Vec::new();
    let mut u = u0;
    while u < 1.0 && grading.len() < 40 {
        grading.push(u);
        u *= 4.0;
    }
    if dim == 2 {
        let mut pts = alloc::vec![0.0, PI];
        if cross > 0.0 && cross < 1.0 {
            pts.push(2.0 * libm::asin(libm::sqrt(cross)));
        }
        pts.extend(grading);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        let rho = |u: f64| {
            let h = libm::sin(0.5 * u);
            libm::sqrt(d2 + 4.0 * rs * h * h)
        };
        Ok(2.0 * integrate(|u| g(rho(u)), &pts, tol)?.value)
    } else {
        // y = 1 + cos(angle to v), ρ² = (r-s)² + 2rs·y
        let mut pts = alloc::vec![0.0, 2.0];
        if cross > 0.0 && cross < 1.0 {
            pts.push(2.0 * cross);
        }
        pts.extend(grading.iter().map(|u| 0.5 * u * u));
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        Ok(2.0 * PI * integrate(|y| g(libm::sqrt(d2 + 2.0 * rs * y)), &pts, tol)?.value)
    }
}

/// `∫ g(|v - v'|, |v'|) dv'` for `|v| = r` in polar coordinates about `v`.
fn polar_about<G: Fn(f64, f64) -> f64>(eq: &HeavyTailEquilibrium, r: f64, g: G) -> Result<HalfLine> {
    let dim = eq.dim();
    let rc = eq.r_cut();
    let mut kinks: Vec<f64> = Vec::with_capacity(3);
    if r > 0.0 {
        kinks.push(r);
    }
    if rc.is_finite() {
        if (r - rc).abs() > 0.0 {
            kinks.push((r - rc).abs());
        }
        kinks.push(r + rc);
        // the core of F sits at distance ≈ r from v; the tail structure
        // around it scales with the distance to that shell
        let mut d = 4.0 * rc;
        while d < r && kinks.len() < 64 {
            kinks.push(r - d);
            kinks.push(r + d);
            d *= 4.0;
        }
    }
    let scale = if rc.is_finite() { r + rc } else { r + 10.0 };
    let n1 = (dim - 1) as i32;
    let failed = core::cell::Cell::new(false);
    let res = half_line(
        |s| match sphere_integral(dim, r, s, rc, &|rho| g(s, rho)) {
            Ok(v) => v * s.powi(n1),
            Err(_) => {
                failed.set(true);
                0.0
            }
        },
        1e-3,
        1e3 * scale.max(1.0),
        &kinks,
        NU_TOL,
    );
    if failed.get() {
        bail!(NumericalFailure, "angular quadrature failed for |v| = {r}");
    }
    res
}
