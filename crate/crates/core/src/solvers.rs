//! Per-mode solvers for the rescaled kinetic equation
//! `θ ∂_t f + ε v·∇_x f = L(f)` on a periodic box, and for its fractional
//! and classical diffusion limits.
//!
//! A field is stored by its Fourier coefficients `f̂(k) = ∫ f e^{-ik·x} dx`
//! over a [`ModeSet`]; the velocity dependence lives on the nodes of the
//! operator's [`VelocityGrid`](crate::collision::VelocityGrid). Modes never
//! interact, so every solver runs mode by mode.
//!
//! The kinetic step is a Lie splitting: the transport phase is integrated
//! exactly (`f̂ ← e^{-iε(v·k)Δt/θ} f̂`), then the collision phase by
//! backward Euler for the loss with the gain treated as a fixed-point
//! correction. Both phases contract the weighted norm `∫|f̂|²/F`, so the
//! scheme is dissipative for any step; the splitting is first order in `Δt`.

use crate::collision::DiscreteOperator;
use crate::error::bail;
use crate::math::{check_dim, dot, norm};
#[allow(unused_imports)]
use crate::math::Float;
use crate::quadrature::{integrate, Tolerance};
use crate::scaling::ScalingRegime;
use crate::{Result, Vector};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

/// Relative growth of the weighted norm tolerated in one step.
pub const NORM_GROWTH_TOL: f64 = 1e-6;
/// Convergence threshold of the gain sub-iteration.
pub const SUB_ITERATION_TOL: f64 = 1e-10;
const MAX_SUB_ITERATIONS: usize = 500;

/// Wave vectors of a periodic box `[0, L)^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    dim: usize,
    box_len: f64,
    modes: Vec<Vector>,
}

impl ModeSet {
    /// All `k = 2π m / L` with integer `m_j ∈ [-n/2, n/2)` per axis.
    pub fn periodic(dim: usize, box_len: f64, per_axis: usize) -> Result<Self> {
        check_dim(dim)?;
        if !(box_len > 0.0 && box_len.is_finite()) {
            bail!(InvalidInput, "box length {box_len} must be positive");
        }
        if per_axis == 0 {
            bail!(InvalidInput, "need at least one mode per axis");
        }
        let h = (per_axis / 2) as i64;
        let ints: Vec<i64> = (0..per_axis as i64).map(|m| m - h).collect();
        let dk = 2.0 * PI / box_len;
        let mut modes = Vec::with_capacity(per_axis.pow(dim as u32));
        let mut idx = vec![0usize; dim];
        loop {
            let mut k = [0.0; 3];
            for d in 0..dim {
                k[d] = dk * ints[idx[d]] as f64;
            }
            modes.push(k);
            let mut d = dim;
            loop {
                if d == 0 {
                    return Ok(ModeSet { dim, box_len, modes });
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < per_axis {
                    break;
                }
                idx[d] = 0;
            }
        }
    }

    /// An explicit list of wave vectors (for single-mode studies).
    pub fn from_modes(dim: usize, box_len: f64, modes: Vec<Vector>) -> Result<Self> {
        check_dim(dim)?;
        if !(box_len > 0.0 && box_len.is_finite()) {
            bail!(InvalidInput, "box length {box_len} must be positive");
        }
        for k in &modes {
            crate::math::check_finite(k)?;
            if k[dim..].iter().any(|c| *c != 0.0) {
                bail!(InvalidInput, "wave vector {k:?} has components beyond dimension {dim}");
            }
        }
        Ok(ModeSet { dim, box_len, modes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn box_len(&self) -> f64 {
        self.box_len
    }

    pub fn modes(&self) -> &[Vector] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// `L^N`.
    pub fn volume(&self) -> f64 {
        libm::pow(self.box_len, self.dim as f64)
    }

    pub fn zero_index(&self) -> Option<usize> {
        self.modes.iter().position(|k| norm(k) == 0.0)
    }

    /// Index of `-k` for mode `i`, if present.
    pub fn partner(&self, i: usize) -> Option<usize> {
        let k = self.modes[i];
        self.modes.iter().position(|q| (0..3).all(|d| q[d] == -k[d]))
    }
}

/// Which equation produced a [`DensityField`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equation {
    Initial,
    Kinetic,
    Fractional,
    Classical,
}

impl Equation {
    pub fn name(&self) -> &'static str {
        match self {
            Equation::Initial => "initial",
            Equation::Kinetic => "kinetic",
            Equation::Fractional => "frac",
            Equation::Classical => "heat",
        }
    }
}

/// Fourier coefficients of a density `ρ(t, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub modes: ModeSet,
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
    pub source: Equation,
}

impl DensityField {
    pub fn new(modes: ModeSet, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != modes.len() {
            bail!(InvalidInput, "{} amplitudes for {} modes", amplitudes.len(), modes.len());
        }
        Ok(DensityField { modes, amplitudes, time: 0.0, source: Equation::Initial })
    }

    /// Unit-mass Gaussian of standard deviation `width` centred in the box.
    pub fn gaussian(modes: &ModeSet, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            bail!(InvalidInput, "width {width} must be positive");
        }
        let centre = 0.5 * modes.box_len();
        let amps = modes
            .modes()
            .iter()
            .map(|k| {
                let k2 = dot(k, k);
                let shift: f64 = k.iter().sum::<f64>() * centre;
                Complex64::from_polar(libm::exp(-0.5 * width * width * k2), -shift)
            })
            .collect();
        DensityField::new(modes.clone(), amps)
    }

    /// Unit point mass at the origin.
    pub fn point_mass(modes: &ModeSet) -> Self {
        DensityField {
            modes: modes.clone(),
            amplitudes: vec![Complex64::new(1.0, 0.0); modes.len()],
            time: 0.0,
            source: Equation::Initial,
        }
    }

    /// `∫ ρ dx`, the zero-mode coefficient (0 if the zero mode is absent).
    pub fn mass(&self) -> f64 {
        self.modes.zero_index().map_or(0.0, |i| self.amplitudes[i].re)
    }

    /// `∫ |ρ|² dx` by Parseval.
    pub fn l2_norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() / self.modes.volume()
    }

    /// `‖ρ - reference‖ / ‖reference‖` in `L²(box)`.
    pub fn relative_l2(&self, reference: &DensityField) -> Result<f64> {
        if self.modes != reference.modes {
            bail!(InvalidInput, "fields live on different mode sets");
        }
        let num: f64 = self.amplitudes.iter().zip(&reference.amplitudes).map(|(a, b)| (a - b).norm_sqr()).sum();
        let den: f64 = reference.amplitudes.iter().map(|b| b.norm_sqr()).sum();
        if den == 0.0 {
            bail!(InvalidInput, "reference field is zero");
        }
        Ok(libm::sqrt(num / den))
    }

    /// `ρ(x) = L^{-N} Σ_k ρ̂(k) e^{ik·x}` (real part).
    pub fn eval(&self, points: &[Vector]) -> Vec<f64> {
        let vol = self.modes.volume();
        points
            .iter()
            .map(|x| {
                let s: f64 = self
                    .modes
                    .modes()
                    .iter()
                    .zip(&self.amplitudes)
                    .map(|(k, a)| (a * Complex64::from_polar(1.0, dot(k, x))).re)
                    .sum();
                s / vol
            })
            .collect()
    }
}

/// Fourier coefficients of `f(t, x, v)` on the nodes of a velocity grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceField {
    pub modes: ModeSet,
    /// `values[m][i]`: mode `m`, velocity node `i`.
    pub values: Vec<Vec<Complex64>>,
    pub time: f64,
    pub eps: f64,
    pub regime: ScalingRegime,
}

impl PhaseSpaceField {
    pub fn new(
        modes: ModeSet,
        values: Vec<Vec<Complex64>>,
        eps: f64,
        regime: ScalingRegime,
    ) -> Result<Self> {
        if values.len() != modes.len() {
            bail!(InvalidInput, "{} mode rows for {} modes", values.len(), modes.len());
        }
        regime.theta(eps)?;
        Ok(PhaseSpaceField { modes, values, time: 0.0, eps, regime })
    }

    /// `f₀ = ρ₀(x) F(v)`.
    pub fn well_prepared(op: &DiscreteOperator, rho0: &DensityField, eps: f64, regime: ScalingRegime) -> Result<Self> {
        if op.grid().dim() != rho0.modes.dim() {
            bail!(InvalidInput, "velocity and space dimensions differ");
        }
        let f = op.equilibrium();
        let values = rho0.amplitudes.iter().map(|a| f.iter().map(|fi| a * fi).collect()).collect();
        PhaseSpaceField::new(rho0.modes.clone(), values, eps, regime)
    }

    /// `Σ_k L^{-N} ∫ |f̂|² / F dv`.
    pub fn weighted_norm_sq(&self, op: &DiscreteOperator) -> f64 {
        let vol = self.modes.volume();
        self.values.iter().map(|row| mode_norm_sq(op, row)).sum::<f64>() / vol
    }

    /// `∫∫ f dv dx`.
    pub fn mass(&self, op: &DiscreteOperator) -> f64 {
        self.modes.zero_index().map_or(0.0, |i| mode_density(op, &self.values[i]).re)
    }

    /// Largest `|f̂(-k, v) - conj f̂(k, v)|` over modes whose partner exists.
    pub fn reality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.modes.len() {
            if let Some(j) = self.modes.partner(i) {
                for (a, b) in self.values[i].iter().zip(&self.values[j]) {
                    worst = worst.max((a - b.conj()).norm());
                }
            }
        }
        worst
    }
}

fn mode_norm_sq(op: &DiscreteOperator, row: &[Complex64]) -> f64 {
    let w = op.grid().weights();
    let f = op.equilibrium();
    row.iter().zip(w).zip(f).map(|((x, w), f)| w * x.norm_sqr() / f).sum()
}

fn mode_density(op: &DiscreteOperator, row: &[Complex64]) -> Complex64 {
    row.iter().zip(op.grid().weights()).map(|(x, w)| x * w).sum()
}

/// Splits `f = ρF + g` mode by mode.
pub fn decompose(field: &PhaseSpaceField, op: &DiscreteOperator) -> (DensityField, Vec<Vec<Complex64>>) {
    let f = op.equilibrium();
    let mut amps = Vec::with_capacity(field.values.len());
    let mut g = Vec::with_capacity(field.values.len());
    for row in &field.values {
        let rho = mode_density(op, row);
        amps.push(rho);
        g.push(row.iter().zip(f).map(|(x, fi)| x - rho * fi).collect());
    }
    let rho = DensityField { modes: field.modes.clone(), amplitudes: amps, time: field.time, source: Equation::Kinetic };
    (rho, g)
}

/// `Σ_k L^{-N} ∫ |ĝ|² / F dv` of a fluctuation from [`decompose`].
pub fn fluctuation_norm_sq(op: &DiscreteOperator, modes: &ModeSet, g: &[Vec<Complex64>]) -> f64 {
    g.iter().map(|row| mode_norm_sq(op, row)).sum::<f64>() / modes.volume()
}

/// Output of [`solve_kinetic`].
#[derive(Debug, Clone)]
pub struct KineticTrajectory {
    /// Sample times actually hit (multiples of `dt`).
    pub times: Vec<f64>,
    pub densities: Vec<DensityField>,
    /// Weighted norm `Σ∫|f̂|²/F` after every step (entry 0 is the initial value).
    pub norm_history: Vec<f64>,
    /// Total mass after every step.
    pub mass_history: Vec<f64>,
    /// `∫_0^T Σ∫|ĝ|²/F dt` (trapezoidal in the steps).
    pub fluctuation_integral: f64,
    pub final_field: PhaseSpaceField,
    pub dt: f64,
    pub steps: usize,
    /// Most gain sub-iterations used in a single step.
    pub max_sub_iterations: usize,
}

impl KineticTrajectory {
    /// Largest relative change of the mass along the run.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.mass_history[0];
        self.mass_history.iter().map(|m| ((m - m0) / m0).abs()).fold(0.0, f64::max)
    }
}

/// Default step `T/2048`; accuracy rather than stability sets it.
pub fn default_dt(horizon: f64) -> f64 {
    horizon / 2048.0
}

struct ModeRun {
    norms: Vec<f64>,
    g_norms: Vec<f64>,
    rho: Vec<Complex64>,
    samples: Vec<Complex64>,
    last: Vec<Complex64>,
    sub_iterations: usize,
}

/// Collision phase `(1 + τν) f = f* + τ K f`.
enum Collision {
    /// `K f = a (c·f)`: solved directly (Sherman-Morrison).
    RankOne { a: Vec<f64>, c: Vec<f64>, inv: Vec<f64>, denom: f64 },
    /// Fixed-point iteration on the gain.
    Iterative { inv: Vec<f64>, tau: f64 },
}

impl Collision {
    fn new(op: &DiscreteOperator, tau: f64) -> Self {
        let inv: Vec<f64> = op.nu().iter().map(|nu| 1.0 / (1.0 + tau * nu)).collect();
        match op.rank_one() {
            Some((a, c)) => {
                let ca: f64 = a.iter().zip(&c).zip(&inv).map(|((a, c), i)| a * c * i).sum();
                let denom = 1.0 - tau * ca;
                let a = a.iter().map(|a| tau * a).collect();
                Collision::RankOne { a, c, inv, denom }
            }
            None => Collision::Iterative { inv, tau },
        }
    }

    fn apply(&self, op: &DiscreteOperator, f: &mut [Complex64], scratch: &mut Scratch) -> Result<usize> {
        match self {
            Collision::RankOne { a, c, inv, denom } => {
                let num: Complex64 = f.iter().zip(c).zip(inv).map(|((x, c), i)| x * (c * i)).sum();
                let s = num / *denom;
                for ((x, a), i) in f.iter_mut().zip(a).zip(inv) {
                    *x = (*x + s * a) * i;
                }
                Ok(1)
            }
            Collision::Iterative { inv, tau } => {
                let n = f.len();
                scratch.star.clear();
                scratch.star.extend_from_slice(f);
                for it in 1..=MAX_SUB_ITERATIONS {
                    for i in 0..n {
                        scratch.re[i] = f[i].re;
                        scratch.im[i] = f[i].im;
                    }
                    op.gain_into(&scratch.re, &mut scratch.gre);
                    op.gain_into(&scratch.im, &mut scratch.gim);
                    let mut change = 0.0f64;
                    let mut size = 0.0f64;
                    for i in 0..n {
                        let next = (scratch.star[i] + Complex64::new(scratch.gre[i], scratch.gim[i]) * *tau) * inv[i];
                        change = change.max((next - f[i]).norm());
                        size = size.max(next.norm());
                        f[i] = next;
                    }
                    if change <= SUB_ITERATION_TOL * size {
                        return Ok(it);
                    }
                }
                bail!(NumericalFailure, "gain sub-iteration did not reach {SUB_ITERATION_TOL:e} in {MAX_SUB_ITERATIONS} sweeps");
            }
        }
    }
}

struct Scratch {
    star: Vec<Complex64>,
    re: Vec<f64>,
    im: Vec<f64>,
    gre: Vec<f64>,
    gim: Vec<f64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch { star: Vec::with_capacity(n), re: vec![0.0; n], im: vec![0.0; n], gre: vec![0.0; n], gim: vec![0.0; n] }
    }
}

fn g_norm_sq(op: &DiscreteOperator, row: &[Complex64]) -> (f64, Complex64) {
    let rho = mode_density(op, row);
    let w = op.grid().weights();
    let f = op.equilibrium();
    let s = row.iter().zip(w).zip(f).map(|((x, w), fi)| w * (x - rho * fi).norm_sqr() / fi).sum();
    (s, rho)
}

#[allow(clippy::too_many_arguments)]
fn run_mode(
    op: &DiscreteOperator,
    k: &Vector,
    row: &[Complex64],
    collision: &Collision,
    shift: f64,
    steps: usize,
    sample_steps: &[usize],
    keep_rho: bool,
) -> Result<ModeRun> {
    let n = row.len();
    let nodes = op.grid().nodes();
    let phase: Vec<Complex64> = nodes.iter().map(|v| Complex64::from_polar(1.0, -shift * dot(v, k))).collect();
    let mut f = row.to_vec();
    let mut scratch = Scratch::new(n);
    let mut norms = Vec::with_capacity(steps + 1);
    let mut g_norms = Vec::with_capacity(steps + 1);
    let mut rho_hist = Vec::new();
    let mut samples = Vec::with_capacity(sample_steps.len());
    let mut sub = 0;
    let transport = norm(k) > 0.0;
    let record = |f: &[Complex64], norms: &mut Vec<f64>, g_norms: &mut Vec<f64>, rho_hist: &mut Vec<Complex64>| {
        let (g, rho) = g_norm_sq(op, f);
        norms.push(mode_norm_sq(op, f));
        g_norms.push(g);
        if keep_rho {
            rho_hist.push(rho);
        }
        rho
    };
    let rho0 = record(&f, &mut norms, &mut g_norms, &mut rho_hist);
    let mut next_sample = 0;
    while next_sample < sample_steps.len() && sample_steps[next_sample] == 0 {
        samples.push(rho0);
        next_sample += 1;
    }
    for step in 1..=steps {
        if transport {
            for (x, e) in f.iter_mut().zip(&phase) {
                *x *= e;
            }
        }
        sub = sub.max(collision.apply(op, &mut f, &mut scratch)?);
        let rho = record(&f, &mut norms, &mut g_norms, &mut rho_hist);
        let (prev, now) = (norms[step - 1], norms[step]);
        if now > prev * (1.0 + NORM_GROWTH_TOL) + f64::MIN_POSITIVE {
            bail!(
                Instability,
                "weighted norm of mode {k:?} grew from {prev:e} to {now:e} at step {step}"
            );
        }
        while next_sample < sample_steps.len() && sample_steps[next_sample] == step {
            samples.push(rho);
            next_sample += 1;
        }
    }
    Ok(ModeRun { norms, g_norms, rho: rho_hist, samples, last: f, sub_iterations: sub })
}

/// Advances `f0` to `horizon` with steps of about `dt`; densities are
/// recorded at the step boundaries nearest to `sample_times`.
pub fn solve_kinetic(
    op: &DiscreteOperator,
    f0: &PhaseSpaceField,
    horizon: f64,
    dt: f64,
    sample_times: &[f64],
) -> Result<KineticTrajectory> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        bail!(InvalidInput, "horizon {horizon} must be positive");
    }
    if !(dt > 0.0 && dt <= horizon) {
        bail!(InvalidInput, "step {dt} must lie in (0, {horizon}]");
    }
    if f0.values.iter().any(|r| r.len() != op.len()) {
        bail!(InvalidInput, "field rows do not match the velocity grid ({} nodes)", op.len());
    }
    if f0.modes.dim() != op.grid().dim() {
        bail!(InvalidInput, "velocity and space dimensions differ");
    }
    let norm0 = f0.weighted_norm_sq(op);
    if !norm0.is_finite() {
        bail!(InvalidInput, "initial datum has infinite weighted norm");
    }
    let theta = f0.regime.theta(f0.eps)?;
    let steps = (horizon / dt).ceil() as usize;
    let dt = horizon / steps as f64;
    let tau = dt / theta;
    let shift = f0.eps * dt / theta;
    let mut sample_steps: Vec<usize> = sample_times
        .iter()
        .map(|t| {
            if !(*t >= 0.0 && *t <= horizon * (1.0 + 1e-12)) {
                bail!(InvalidInput, "sample time {t} outside [0, {horizon}]");
            }
            Ok(((t / dt).round() as usize).min(steps))
        })
        .collect::<Result<_>>()?;
    sample_steps.sort_unstable();
    let collision = Collision::new(op, tau);
    let zero = f0.modes.zero_index();
    let runs = crate::par::map_range(f0.modes.len(), |m| {
        run_mode(op, &f0.modes.modes()[m], &f0.values[m], &collision, shift, steps, &sample_steps, zero == Some(m))
    })
    .into_iter()
    .collect::<Result<Vec<ModeRun>>>()?;
    let vol = f0.modes.volume();
    let mut norm_history = vec![0.0; steps + 1];
    let mut g_total = vec![0.0; steps + 1];
    for run in &runs {
        for s in 0..=steps {
            norm_history[s] += run.norms[s];
            g_total[s] += run.g_norms[s];
        }
    }
    for s in 0..=steps {
        norm_history[s] /= vol;
        g_total[s] /= vol;
    }
    let fluctuation_integral =
        dt * (0.5 * (g_total[0] + g_total[steps]) + g_total[1..steps].iter().sum::<f64>());
    let mass_history = match zero {
        Some(z) => runs[z].rho.iter().map(|r| r.re).collect(),
        None => vec![0.0; steps + 1],
    };
    let times: Vec<f64> = sample_steps.iter().map(|s| *s as f64 * dt).collect();
    let densities = (0..sample_steps.len())
        .map(|j| DensityField {
            modes: f0.modes.clone(),
            amplitudes: runs.iter().map(|r| r.samples[j]).collect(),
            time: times[j],
            source: Equation::Kinetic,
        })
        .collect();
    let max_sub_iterations = runs.iter().map(|r| r.sub_iterations).max().unwrap_or(0);
    let final_field = PhaseSpaceField {
        modes: f0.modes.clone(),
        values: runs.into_iter().map(|r| r.last).collect(),
        time: f0.time + horizon,
        eps: f0.eps,
        regime: f0.regime.clone(),
    };
    Ok(KineticTrajectory {
        times,
        densities,
        norm_history,
        mass_history,
        fluctuation_integral,
        final_field,
        dt,
        steps,
        max_sub_iterations,
    })
}

/// Kinetic density at `horizon` from well-prepared data `ρ₀ F`.
pub fn kinetic_density(
    op: &DiscreteOperator,
    regime: &ScalingRegime,
    rho0: &DensityField,
    eps: f64,
    horizon: f64,
    dt: f64,
) -> Result<KineticTrajectory> {
    let f0 = PhaseSpaceField::well_prepared(op, rho0, eps, regime.clone())?;
    solve_kinetic(op, &f0, horizon, dt, &[horizon])
}

/// `ρ̂(T, k) = e^{-κ|k|^γ T} ρ̂₀(k)`.
pub fn solve_fractional_heat(kappa: f64, gamma: f64, rho0: &DensityField, horizon: f64) -> Result<DensityField> {
    if !(gamma > 0.0 && gamma <= 2.0) {
        bail!(InvalidInput, "order γ = {gamma} outside (0, 2]");
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        bail!(InvalidInput, "κ = {kappa} must be positive");
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        bail!(InvalidInput, "horizon {horizon} must be nonnegative");
    }
    let amplitudes = rho0
        .modes
        .modes()
        .iter()
        .zip(&rho0.amplitudes)
        .map(|(k, a)| a * libm::exp(-kappa * libm::pow(norm(k), gamma) * horizon))
        .collect();
    Ok(DensityField { modes: rho0.modes.clone(), amplitudes, time: rho0.time + horizon, source: Equation::Fractional })
}

/// `ρ̂(T, k) = e^{-(k·Dk) T} ρ̂₀(k)` for a symmetric positive semidefinite `D`.
pub fn solve_classical_heat(d: &[[f64; 3]; 3], rho0: &DensityField, horizon: f64) -> Result<DensityField> {
    let dim = rho0.modes.dim();
    let scale = d.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    for i in 0..dim {
        for j in 0..dim {
            if !d[i][j].is_finite() || (d[i][j] - d[j][i]).abs() > 1e-12 * scale {
                bail!(InvalidInput, "diffusion matrix is not symmetric: {d:?}");
            }
        }
    }
    if !principal_minors_nonnegative(d, dim, 1e-12 * scale) {
        bail!(InvalidInput, "diffusion matrix is not positive semidefinite: {d:?}");
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        bail!(InvalidInput, "horizon {horizon} must be nonnegative");
    }
    let amplitudes = rho0
        .modes
        .modes()
        .iter()
        .zip(&rho0.amplitudes)
        .map(|(k, a)| {
            let mut q = 0.0;
            for i in 0..dim {
                for j in 0..dim {
                    q += k[i] * d[i][j] * k[j];
                }
            }
            a * libm::exp(-q * horizon)
        })
        .collect();
    Ok(DensityField { modes: rho0.modes.clone(), amplitudes, time: rho0.time + horizon, source: Equation::Classical })
}

fn principal_minors_nonnegative(d: &[[f64; 3]; 3], dim: usize, tol: f64) -> bool {
    let det2 = |i: usize, j: usize| d[i][i] * d[j][j] - d[i][j] * d[j][i];
    let ok1 = (0..dim).all(|i| d[i][i] >= -tol);
    let ok2 = (0..dim).all(|i| (i + 1..dim).all(|j| det2(i, j) >= -tol * tol.max(1.0)));
    let ok3 = dim < 3 || {
        let det = d[0][0] * (d[1][1] * d[2][2] - d[1][2] * d[2][1]) - d[0][1] * (d[1][0] * d[2][2] - d[1][2] * d[2][0])
            + d[0][2] * (d[1][0] * d[2][1] - d[1][1] * d[2][0]);
        det >= -tol
    };
    ok1 && ok2 && ok3
}

/// One-dimensional fundamental solution of `∂_t ρ + κ(-Δ)^{γ/2} ρ = 0`:
/// `ρ(t, x) = (1/π) ∫_0^∞ cos(kx) e^{-κ t k^γ} dk`, evaluated by panel
/// quadrature over half periods of the cosine.
pub fn stable_profile(kappa: f64, gamma: f64, t: f64, x_grid: &[f64]) -> Result<Vec<f64>> {
    if !(gamma > 0.0 && gamma <= 2.0) {
        bail!(InvalidInput, "order γ = {gamma} outside (0, 2]");
    }
    if !(kappa > 0.0 && t > 0.0 && kappa.is_finite() && t.is_finite()) {
        bail!(InvalidInput, "need κ > 0 and t > 0 (got κ = {kappa}, t = {t})");
    }
    let s = libm::pow(kappa * t, 1.0 / gamma);
    let k_max = libm::pow(40.0, 1.0 / gamma);
    let tol = Tolerance::new(1e-13, 1e-12);
    let mut out = Vec::with_capacity(x_grid.len());
    let mut peak = 0.0f64;
    for &x in x_grid {
        if !x.is_finite() {
            bail!(InvalidInput, "non-finite abscissa {x}");
        }
        let y = (x / s).abs();
        let g = |k: f64| libm::cos(k * y) * libm::exp(-libm::pow(k, gamma));
        // graded panels at k = 0, where k^γ is not smooth
        let mut edges: Vec<f64> = (0..30).rev().map(|j| libm::ldexp(1.0, -j)).filter(|e| *e < k_max).collect();
        edges.insert(0, 0.0);
        if y > 0.0 {
            let half = PI / y;
            let panels = (k_max / half).ceil();
            if panels > 2e6 {
                bail!(Resolution, "|x| = {x} needs {panels} half-period panels");
            }
            let mut e = half;
            while e < k_max {
                edges.push(e);
                e += half;
            }
        }
        edges.push(k_max);
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        edges.dedup();
        let mut sum = 0.0;
        for w in edges.windows(2) {
            sum += integrate(g, w, tol)?.value;
        }
        let v = sum / (PI * s);
        peak = peak.max(v);
        out.push(v);
    }
    if let Some(bad) = out.iter().find(|v| **v < -1e-6 * peak.max(1e-300)) {
        bail!(Resolution, "profile dips to {bad:e}; refine the k grid");
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
