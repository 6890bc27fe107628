//! Velocity-jump process behind the rescaled kinetic equation.
//!
//! Reading the generator off `θ ∂_t f + ε v·∇_x f = L(f)`: a particle
//! flies at velocity `(ε/θ) v`, jumps at rate `ν(v)/θ`, and draws its new
//! velocity from `σ(v', v)/ν(v) = b(v', v) F(v')/ν(v)`. For BGK the rate is
//! `1/θ` and the new velocity is a draw from `F`.
//!
//! The rate depends on `v` only, and `v` is constant during a flight, so the
//! holding time is drawn exactly (`Exp(ν(v)/θ)`) for every kernel: the
//! simulation has no time-discretisation error. Post-jump velocities are
//! drawn by rejection against `F`, or against the tilted law `⟨v⟩^β F` when
//! `b` grows at infinity.
//!
//! Every particle owns a ChaCha8 stream selected by its index, so an
//! ensemble depends only on the seed and not on how particles are spread
//! over workers.

use crate::collision::{CollisionKernel, KernelKind};
use crate::equilibria::table::CdfTable;
use crate::equilibria::{random_direction, uniform, HeavyTailEquilibrium};
use crate::error::bail;
use crate::math::{bracket, dot, geomspace, loglog_slope, norm, scale, sphere_area};
#[allow(unused_imports)]
use crate::math::Float;
use crate::scaling::ScalingRegime;
use crate::{Result, Vector};
use alloc::vec::Vec;
use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Acceptance rate below which a jump law counts as unsamplable.
pub const MIN_ACCEPTANCE: f64 = 1e-3;
const MAX_PROPOSALS: u64 = 1_000_000;
const JACKKNIFE_BLOCKS: usize = 100;

/// Inputs of [`simulate`] besides the kernel and the regime.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpProcessParams {
    pub eps: f64,
    pub horizon: f64,
    pub n_particles: usize,
    pub seed: u64,
    /// Extra snapshot times in `(0, horizon)`; the horizon is always recorded.
    pub snapshots: Vec<f64>,
    /// Switch collisions off (pure free streaming).
    pub free_streaming: bool,
}

impl JumpProcessParams {
    pub fn new(eps: f64, horizon: f64, n_particles: usize, seed: u64) -> Self {
        JumpProcessParams { eps, horizon, n_particles, seed, snapshots: Vec::new(), free_streaming: false }
    }

    pub fn with_snapshots(mut self, times: &[f64]) -> Self {
        self.snapshots = times.to_vec();
        self
    }
}

/// Particle states at one time. All particles start at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    pub dim: usize,
    pub time: f64,
    pub positions: Vec<Vector>,
    pub velocities: Vec<Vector>,
}

impl ParticleEnsemble {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// `(1/n) Σ |x_j|²` with its standard error.
    pub fn mean_square_displacement(&self) -> (f64, f64) {
        let sq: Vec<f64> = self.positions.iter().map(|x| dot(x, x)).collect();
        mean_and_se(&sq)
    }
}

/// Output of [`simulate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    /// Snapshots in increasing time; the last one is at the horizon.
    pub snapshots: Vec<ParticleEnsemble>,
    pub jumps: u64,
    pub proposals: u64,
}

impl Simulation {
    pub fn last(&self) -> &ParticleEnsemble {
        self.snapshots.last().expect("the horizon is always recorded")
    }

    /// Accepted over proposed post-jump velocities.
    pub fn acceptance(&self) -> f64 {
        if self.proposals == 0 { 1.0 } else { self.jumps as f64 / self.proposals as f64 }
    }
}

/// Radial sampler for `⟨v⟩^β F(v)`.
#[derive(Debug, Clone)]
struct TiltedLaw {
    table: CdfTable,
    /// Mass fraction carried by the analytic tail past `r_max`.
    tail_frac: f64,
    r_max: f64,
    /// Tail exponent `α - β` of the tilted radial law.
    tail_index: f64,
}

impl TiltedLaw {
    fn new(eq: &HeavyTailEquilibrium, beta: f64) -> Self {
        let dim = eq.dim() as f64;
        let rc = eq.r_cut();
        let (r_min, r_max) = if eq.has_tail() { (1e-8 * rc.min(1.0), 1e8 * rc.max(1.0)) } else { (1e-8, 40.0) };
        let mut ts: Vec<f64> = geomspace(r_min, r_max, 40 * libm::log10(r_max / r_min) as usize + 1)
            .into_iter()
            .map(libm::log)
            .collect();
        if rc.is_finite() && rc > r_min && rc < r_max {
            ts.push(libm::log(rc));
            ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        }
        let h = |t: f64| {
            let r = libm::exp(t);
            libm::pow(r, dim) * libm::pow(bracket(r), beta) * eq.density(r)
        };
        // mass inside [0, r_min] is negligible (∝ r_min^N)
        let table = CdfTable::build(h, ts.clone());
        let inner: f64 = {
            let (gx, gw) = crate::quadrature::gauss_legendre(16);
            ts.windows(2)
                .map(|w| {
                    let c = 0.5 * (w[0] + w[1]);
                    let hw = 0.5 * (w[1] - w[0]);
                    gx.iter().zip(&gw).map(|(x, wt)| wt * h(c + hw * x)).sum::<f64>() * hw
                })
                .sum()
        };
        let tail_index = eq.alpha() - beta;
        let outer = if eq.has_tail() { h(libm::log(r_max)) / tail_index } else { 0.0 };
        TiltedLaw { table, tail_frac: outer / (inner + outer), r_max, tail_index }
    }

    fn draw<R: RngCore>(&self, dim: usize, rng: &mut R) -> Vector {
        let u = uniform(rng);
        let r = if u < self.tail_frac {
            let q = (u / self.tail_frac).max(f64::MIN_POSITIVE);
            self.r_max * libm::pow(q, -1.0 / self.tail_index)
        } else {
            libm::exp(self.table.invert((u - self.tail_frac) / (1.0 - self.tail_frac)))
        };
        scale(&random_direction(dim, rng), r)
    }
}

/// How post-jump velocities are drawn.
#[derive(Debug, Clone)]
enum JumpLaw {
    /// `b ≡ 1`: a draw from `F`.
    Equilibrium,
    /// `b ≤ 1`: propose from `F`, accept with probability `b`.
    Bounded,
    /// Separable with `β > 0`: the law is exactly `⟨v'⟩^β F`, independent of `v`.
    Tilted(TiltedLaw),
    /// `b(v', v) ≤ c ⟨v⟩^β ⟨v'⟩^β`: propose from the tilted law.
    TiltedRejection(TiltedLaw, f64),
    /// `|v - v'|^β` with `β < 0`: mixture of `F` and `|u|^β` on the unit
    /// ball around `v`.
    Singular { f_max: f64, ball_mass: f64 },
}

struct Sampler<'a> {
    kernel: &'a CollisionKernel,
    eq: &'a HeavyTailEquilibrium,
    law: JumpLaw,
    dim: usize,
}

impl<'a> Sampler<'a> {
    fn new(kernel: &'a CollisionKernel) -> Result<Self> {
        let eq = kernel.equilibrium();
        let beta = kernel.beta();
        let law = match kernel.kind() {
            KernelKind::Bgk => JumpLaw::Equilibrium,
            _ if beta == 0.0 => JumpLaw::Equilibrium,
            KernelKind::Separable | KernelKind::Shifted if beta < 0.0 => JumpLaw::Bounded,
            KernelKind::Separable => JumpLaw::Tilted(TiltedLaw::new(eq, beta)),
            KernelKind::Shifted | KernelKind::Physical if beta > 0.0 => {
                // ⟨v - v'⟩^β ≤ 2^{β/2} ⟨v⟩^β ⟨v'⟩^β, and |v - v'| ≤ ⟨v - v'⟩
                JumpLaw::TiltedRejection(TiltedLaw::new(eq, beta), libm::pow(2.0, 0.5 * beta))
            }
            // physical with β < 0
            _ => {
                let dim = eq.dim();
                if beta <= -(dim as f64) {
                    bail!(Unsamplable, "|v - v'|^β with β = {beta} is not locally integrable in dimension {dim}");
                }
                JumpLaw::Singular { f_max: eq.density(0.0), ball_mass: sphere_area(dim) / (dim as f64 + beta) }
            }
        };
        Ok(Sampler { kernel, eq, law, dim: eq.dim() })
    }

    /// One post-jump velocity; returns it with the number of proposals used.
    fn draw<R: RngCore>(&self, v: &Vector, rng: &mut R) -> Result<(Vector, u64)> {
        let beta = self.kernel.beta();
        let mut tries = 0u64;
        loop {
            tries += 1;
            if tries > MAX_PROPOSALS {
                bail!(Unsamplable, "no post-jump velocity accepted in {MAX_PROPOSALS} proposals at |v| = {}", norm(v));
            }
            let (w, accept) = match &self.law {
                JumpLaw::Equilibrium => return Ok((self.eq.sample_one(rng), 1)),
                JumpLaw::Tilted(t) => return Ok((t.draw(self.dim, rng), 1)),
                JumpLaw::Bounded => {
                    let w = self.eq.sample_one(rng);
                    let b = self.kernel.b(&w, v);
                    (w, b)
                }
                JumpLaw::TiltedRejection(t, c) => {
                    let w = t.draw(self.dim, rng);
                    let env = c * libm::pow(bracket(norm(v)) * bracket(norm(&w)), beta);
                    (w, self.kernel.b(&w, v) / env)
                }
                JumpLaw::Singular { f_max, ball_mass } => {
                    let local = f_max * ball_mass;
                    let w = if uniform(rng) * (1.0 + local) < local {
                        // |u|^{β} on the unit ball: radius law ∝ r^{N-1+β}
                        let r = libm::pow(uniform(rng), 1.0 / (self.dim as f64 + beta));
                        let u = scale(&random_direction(self.dim, rng), r);
                        [v[0] + u[0], v[1] + u[1], v[2] + u[2]]
                    } else {
                        self.eq.sample_one(rng)
                    };
                    let s = norm(&[w[0] - v[0], w[1] - v[1], w[2] - v[2]]);
                    let fw = self.eq.density(norm(&w));
                    let target = libm::pow(s, beta) * fw;
                    let env = fw + if s < 1.0 { f_max * libm::pow(s, beta) } else { 0.0 };
                    (w, target / env)
                }
            };
            if uniform(rng) < accept {
                return Ok((w, tries));
            }
        }
    }

    /// Acceptance rate measured on a deterministic pilot sample.
    fn pilot_acceptance(&self) -> Result<f64> {
        if matches!(self.law, JumpLaw::Equilibrium | JumpLaw::Tilted(_)) {
            return Ok(1.0);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let (mut acc, mut tot) = (0u64, 0u64);
        for _ in 0..64 {
            let v = self.eq.sample_one(&mut rng);
            for _ in 0..32 {
                let (_, t) = self.draw(&v, &mut rng)?;
                acc += 1;
                tot += t;
            }
        }
        Ok(acc as f64 / tot as f64)
    }
}

struct Track {
    positions: Vec<Vector>,
    velocities: Vec<Vector>,
    jumps: u64,
    proposals: u64,
}

/// Runs the jump process from `x = 0`, `v ~ F` up to `params.horizon`.
pub fn simulate(kernel: &CollisionKernel, regime: &ScalingRegime, params: &JumpProcessParams) -> Result<Simulation> {
    let theta = regime.theta(params.eps)?;
    if !(params.horizon > 0.0 && params.horizon.is_finite()) {
        bail!(InvalidInput, "horizon {} must be positive", params.horizon);
    }
    if params.n_particles == 0 {
        bail!(InvalidInput, "need at least one particle");
    }
    let mut times: Vec<f64> = params.snapshots.clone();
    if times.iter().any(|t| !(*t > 0.0 && *t <= params.horizon)) {
        bail!(InvalidInput, "snapshot times must lie in (0, {}]", params.horizon);
    }
    times.push(params.horizon);
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup();
    let sampler = Sampler::new(kernel)?;
    if !params.free_streaming {
        let a = sampler.pilot_acceptance()?;
        if a < MIN_ACCEPTANCE {
            bail!(Unsamplable, "rejection acceptance {a:e} below {MIN_ACCEPTANCE:e}");
        }
    }
    let speed = params.eps / theta;
    let eq = kernel.equilibrium();
    let tracks = crate::par::map_range(params.n_particles, |j| -> Result<Track> {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(j as u64);
        let mut x = [0.0; 3];
        let mut v = eq.sample_one(&mut rng);
        let mut t = 0.0;
        let mut out = Track {
            positions: Vec::with_capacity(times.len()),
            velocities: Vec::with_capacity(times.len()),
            jumps: 0,
            proposals: 0,
        };
        let mut next = 0;
        loop {
            let hold = if params.free_streaming {
                f64::INFINITY
            } else {
                let rate = kernel.nu_fast(norm(&v)) / theta;
                -libm::log(1.0 - uniform(&mut rng)) / rate
            };
            let t_jump = t + hold;
            while next < times.len() && times[next] <= t_jump {
                let dt = times[next] - t;
                out.positions.push([x[0] + speed * v[0] * dt, x[1] + speed * v[1] * dt, x[2] + speed * v[2] * dt]);
                out.velocities.push(v);
                next += 1;
            }
            if next == times.len() {
                return Ok(out);
            }
            for d in 0..3 {
                x[d] += speed * v[d] * hold;
            }
            t = t_jump;
            let (w, tries) = sampler.draw(&v, &mut rng)?;
            v = w;
            out.jumps += 1;
            out.proposals += tries;
        }
    })
    .into_iter()
    .collect::<Result<Vec<Track>>>()?;
    let jumps = tracks.iter().map(|t| t.jumps).sum();
    let proposals = tracks.iter().map(|t| t.proposals).sum();
    let snapshots = times
        .iter()
        .enumerate()
        .map(|(s, &time)| ParticleEnsemble {
            dim: eq.dim(),
            time,
            positions: tracks.iter().map(|t| t.positions[s]).collect(),
            velocities: tracks.iter().map(|t| t.velocities[s]).collect(),
        })
        .collect();
    Ok(Simulation { snapshots, jumps, proposals })
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = crate::math::pairwise_sum(xs) / n;
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = crate::math::pairwise_sum(&dev) / (n - 1.0).max(1.0);
    (mean, libm::sqrt(var / n))
}

/// Empirical characteristic function at one wave vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfEstimate {
    pub k: Vector,
    pub value: Complex64,
    /// Jackknife standard error of `|value|`.
    pub se_abs: f64,
    /// Jackknife standard errors of the real and imaginary parts.
    pub se_re: f64,
    pub se_im: f64,
}

/// `(1/n) Σ e^{-ik·x_j}` with delete-one-block jackknife errors over
/// 100 contiguous particle blocks.
pub fn empirical_cf(ensemble: &ParticleEnsemble, ks: &[Vector]) -> Result<Vec<CfEstimate>> {
    let n = ensemble.len();
    if n < JACKKNIFE_BLOCKS {
        bail!(Statistics, "{n} particles are too few for {JACKKNIFE_BLOCKS} jackknife blocks");
    }
    let bounds: Vec<usize> = (0..=JACKKNIFE_BLOCKS).map(|b| b * n / JACKKNIFE_BLOCKS).collect();
    Ok(ks
        .iter()
        .map(|k| {
            let block_sums: Vec<Complex64> = bounds
                .windows(2)
                .map(|w| {
                    let (mut c, mut s) = (0.0, 0.0);
                    for x in &ensemble.positions[w[0]..w[1]] {
                        let ph = dot(k, x);
                        c += libm::cos(ph);
                        s += libm::sin(ph);
                    }
                    Complex64::new(c, -s)
                })
                .collect();
            let total: Complex64 = block_sums.iter().sum();
            let value = total / n as f64;
            let g = JACKKNIFE_BLOCKS as f64;
            let loo: Vec<Complex64> = block_sums
                .iter()
                .zip(bounds.windows(2))
                .map(|(b, w)| (total - b) / (n - (w[1] - w[0])) as f64)
                .collect();
            let spread = |f: &dyn Fn(&Complex64) -> f64| {
                let m = loo.iter().map(f).sum::<f64>() / g;
                libm::sqrt((g - 1.0) / g * loo.iter().map(|z| (f(z) - m) * (f(z) - m)).sum::<f64>())
            };
            CfEstimate {
                k: *k,
                value,
                se_abs: spread(&|z| z.norm()),
                se_re: spread(&|z| z.re),
                se_im: spread(&|z| z.im),
            }
        })
        .collect())
}

/// Growth of a displacement quantile over snapshot times.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementReport {
    pub q: f64,
    pub times: Vec<f64>,
    pub quantiles: Vec<f64>,
    /// Relative standard errors of the quantiles.
    pub rel_se: Vec<f64>,
    /// Least-squares slope of `ln quantile` against `ln t`.
    pub slope: f64,
}

impl DisplacementReport {
    pub fn matches(&self, expected: f64, tol: f64) -> bool {
        (self.slope - expected).abs() <= tol
    }
}

/// Quantile `q` of `|x|` and its relative standard error (order-statistic
/// variance with a spacing estimate of the density).
pub fn displacement_quantile(ensemble: &ParticleEnsemble, q: f64) -> Result<(f64, f64)> {
    if !(q > 0.0 && q < 1.0) {
        bail!(InvalidInput, "quantile level {q} outside (0, 1)");
    }
    let mut r: Vec<f64> = ensemble.positions.iter().map(norm).collect();
    let n = r.len();
    if n < 100 {
        bail!(Statistics, "{n} particles are too few for a quantile estimate");
    }
    r.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = q * (n - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    let value = r[i] + frac * (r[(i + 1).min(n - 1)] - r[i]);
    let m = ((n as f64).sqrt() as usize).max(1);
    let (lo, hi) = (i.saturating_sub(m), (i + m).min(n - 1));
    let density = (hi - lo) as f64 / n as f64 / (r[hi] - r[lo]).max(f64::MIN_POSITIVE);
    let se = libm::sqrt(q * (1.0 - q) / n as f64) / density;
    Ok((value, if value > 0.0 { se / value } else { f64::INFINITY }))
}

/// Fits the growth exponent of the `q`-quantile of `|x|`.
pub fn displacement_scaling(snapshots: &[ParticleEnsemble], q: f64) -> Result<DisplacementReport> {
    if snapshots.len() < 4 {
        bail!(InvalidInput, "need at least 4 snapshots, got {}", snapshots.len());
    }
    let mut quantiles = Vec::with_capacity(snapshots.len());
    let mut rel_se = Vec::with_capacity(snapshots.len());
    for s in snapshots {
        let (v, e) = displacement_quantile(s, q)?;
        if !(e <= 0.1) {
            bail!(Statistics, "quantile at t = {} has relative standard error {e:.3}", s.time);
        }
        quantiles.push(v);
        rel_se.push(e);
    }
    let times: Vec<f64> = snapshots.iter().map(|s| s.time).collect();
    let slope = loglog_slope(&times, &quantiles);
    Ok(DisplacementReport { q, times, quantiles, rel_se, slope })
}

/// Kolmogorov-Smirnov distance between the empirical law of `|v|` and the
/// radial law of `F`.
pub fn velocity_ks(ensemble: &ParticleEnsemble, eq: &HeavyTailEquilibrium) -> Result<f64> {
    let mut r: Vec<f64> = ensemble.velocities.iter().map(norm).collect();
    if r.is_empty() {
        bail!(Statistics, "empty ensemble");
    }
    r.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = r.len() as f64;
    let mut worst = 0.0f64;
    let mut prev = f64::NAN;
    let mut cdf = 0.0;
    for (i, x) in r.iter().enumerate() {
        if *x != prev {
            cdf = eq.radial_cdf(*x)?;
            prev = *x;
        }
        worst = worst.max((cdf - i as f64 / n).abs()).max(((i + 1) as f64 / n - cdf).abs());
    }
    Ok(worst)
}

/// Median of the first coordinate with its standard error.
pub fn median_first_coordinate(ensemble: &ParticleEnsemble) -> Result<(f64, f64)> {
    let mut x: Vec<f64> = ensemble.positions.iter().map(|p| p[0]).collect();
    let n = x.len();
    if n < 100 {
        bail!(Statistics, "{n} particles are too few for a median estimate");
    }
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let med = x[n / 2];
    let m = (n as f64).sqrt() as usize;
    let density = (2 * m) as f64 / n as f64 / (x[(n / 2 + m).min(n - 1)] - x[n / 2 - m]).max(f64::MIN_POSITIVE);
    Ok((med, 0.5 / libm::sqrt(n as f64) / density))
}

/// `e^{-κ|k|^γ t}`.
pub fn limit_cf(kappa: f64, gamma: f64, k: &Vector, t: f64) -> f64 {
    libm::exp(-kappa * libm::pow(norm(k), gamma) * t)
}

#[cfg(test)]
mod tests;
