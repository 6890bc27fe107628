//! The acceptance suite A1-A12.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use fraclim_core::collision::{B3Mode, CollisionKernel, DiscreteOperator, GridSpec, KernelKind, VelocityGrid};
use fraclim_core::equilibria::{EquilibriumSpec, HeavyTailEquilibrium, SlowVaryingFn};
use fraclim_core::math::{geomspace, loglog_slope};
use fraclim_core::montecarlo::{displacement_scaling, empirical_cf, limit_cf, simulate, JumpProcessParams};
use fraclim_core::scaling::{classify, RegimeKind};
use fraclim_core::solvers::{
    default_dt, kinetic_density, solve_classical_heat, solve_fractional_heat, solve_kinetic, DensityField, ModeSet,
    PhaseSpaceField,
};
use fraclim_core::symbol::{a_eps, d_eps, kappa_for, kappa_fractional, remainder_probe};
use fraclim_core::Vector;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub id: String,
    pub title: String,
    pub measured: f64,
    pub target: f64,
    pub tolerance: f64,
    /// Time budget in seconds; exceeding it fails the criterion.
    pub budget_s: f64,
    pub seconds: f64,
    pub pass: bool,
    pub detail: String,
}

impl Criterion {
    pub fn line(&self) -> String {
        format!(
            "{} {} {}: measured {:.6e}, target {:.6e}, tolerance {:.3e}, {:.2} s of {} s | {}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.title,
            self.measured,
            self.target,
            self.tolerance,
            self.seconds,
            self.budget_s,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcceptanceReport {
    pub code_version: String,
    pub kappa_scale: f64,
    pub criteria: Vec<Criterion>,
}

impl AcceptanceReport {
    pub fn all_pass(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }

    pub fn get(&self, id: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.id == id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcceptanceOptions {
    /// Criteria to run (all when empty).
    pub only: Vec<String>,
    /// Multiplies every limit coefficient the criteria compare against;
    /// `1.0` for the real suite.
    pub kappa_scale: f64,
}

impl Default for AcceptanceOptions {
    fn default() -> Self {
        Self { only: Vec::new(), kappa_scale: 1.0 }
    }
}

pub const IDS: [&str; 12] = ["A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10", "A11", "A12"];

/// Numerical result of a criterion before timing is attached.
struct Measured {
    measured: f64,
    target: f64,
    tolerance: f64,
    pass: bool,
    detail: String,
}

type Check = fraclim_core::Result<Measured>;

/// Runs the requested criteria in order. Failures, including numerical
/// errors, are part of the report.
pub fn run_acceptance(opts: &AcceptanceOptions) -> AcceptanceReport {
    run_acceptance_with(opts, |_| {})
}

/// [`run_acceptance`], calling `on_done` as each criterion finishes.
pub fn run_acceptance_with(opts: &AcceptanceOptions, mut on_done: impl FnMut(&Criterion)) -> AcceptanceReport {
    let wanted = |id: &str| opts.only.is_empty() || opts.only.iter().any(|o| o.eq_ignore_ascii_case(id));
    let s = opts.kappa_scale;
    let mut criteria = Vec::new();
    let mut kinetic: Option<fraclim_core::Result<KineticRuns>> = None;
    for id in IDS.iter().copied().filter(|id| wanted(id)) {
        let t = Instant::now();
        let (title, budget, res): (&str, f64, Check) = match id {
            "A1" => ("κ closed form vs quadrature", 1.0, a1()),
            "A2" => ("symbol converges to -p - κ|k|^γ", 10.0, a2(s)),
            "A3" => ("symbol bound |a| ≤ |p| + κ|k|^α", 30.0, a3()),
            "A4" => ("coercivity of the four kernels", 60.0, a4()),
            "A5" => ("kinetic density → fractional heat", 600.0, {
                let runs = kinetic.get_or_insert_with(|| kinetic_runs(s));
                a5(runs)
            }),
            "A6" => ("fluctuation energy scales like θ", 600.0, {
                let runs = kinetic.get_or_insert_with(|| kinetic_runs(s));
                a6(runs)
            }),
            "A7" => ("critical quadratic part → κ|k|²", 30.0, a7()),
            "A8" => ("classical regime", 300.0, a8()),
            "A9" => ("remainder decay exponent", 30.0, a9()),
            "A10" => ("Monte Carlo limit law", 300.0, a10(s)),
            "A11" => ("regime map", 1.0, a11()),
            "A12" => ("physical kernel frequency and bounds", 60.0, a12()),
            _ => unreachable!(),
        };
        let seconds = t.elapsed().as_secs_f64();
        let c = match res {
            Ok(m) => Criterion {
                id: id.into(),
                title: title.into(),
                measured: m.measured,
                target: m.target,
                tolerance: m.tolerance,
                budget_s: budget,
                seconds,
                pass: m.pass && seconds < budget,
                detail: if seconds < budget { m.detail } else { format!("over budget; {}", m.detail) },
            },
            Err(e) => Criterion {
                id: id.into(),
                title: title.into(),
                measured: f64::NAN,
                target: f64::NAN,
                tolerance: f64::NAN,
                budget_s: budget,
                seconds,
                pass: false,
                detail: format!("error: {e}"),
            },
        };
        on_done(&c);
        criteria.push(c);
    }
    AcceptanceReport { code_version: crate::record::CODE_VERSION.into(), kappa_scale: s, criteria }
}

fn power_eq(dim: usize, alpha: f64) -> fraclim_core::Result<Arc<HeavyTailEquilibrium>> {
    Ok(Arc::new(HeavyTailEquilibrium::new(EquilibriumSpec::power_tail(dim, alpha, 1.0))?))
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn sci(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn fixed(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.2}")).collect();
    format!("[{}]", parts.join(", "))
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn a1() -> Check {
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for alpha in [0.5, 1.0, 1.5] {
        let regime = classify(alpha, 0.0, &SlowVaryingFn::one())?;
        let kv = kappa_fractional(&regime, 1.0, 1.0, 1)?;
        let quad = kv.quadrature.unwrap_or(f64::NAN);
        let oracle = PI / (0.5 * PI * alpha).sin();
        let e = rel(quad, oracle);
        worst = worst.max(e);
        detail.push(format!("α={alpha}: {quad:.12} vs {oracle:.12}"));
    }
    Ok(Measured { measured: worst, target: 0.0, tolerance: 1e-6, pass: worst < 1e-6, detail: detail.join("; ") })
}

fn bgk_alpha_one() -> fraclim_core::Result<(CollisionKernel, fraclim_core::scaling::ScalingRegime)> {
    let eq = power_eq(1, 1.0)?;
    let regime = classify(1.0, 0.0, eq.ell())?;
    Ok((CollisionKernel::bgk(eq), regime))
}

fn a2(scale: f64) -> Check {
    let (kernel, regime) = bgk_alpha_one()?;
    let kappa = kappa_for(&kernel, &regime)?.kappa * scale;
    let k = [1.0, 0.0, 0.0];
    let limit = -1.0 - kappa;
    let errs = [1e-1, 1e-2, 1e-3, 1e-4]
        .par_iter()
        .map(|&e| a_eps(&kernel, &regime, 1.0, &k, e).map(|s| (s.a_eps.re - limit).hypot(s.a_eps.im)))
        .collect::<fraclim_core::Result<Vec<f64>>>()?;
    let last = errs[3] / limit.abs();
    let pass = strictly_decreasing(&errs) && last < 0.02;
    Ok(Measured { measured: last, target: 0.0, tolerance: 0.02, pass, detail: format!("|a - limit| over ε: {}", sci(&errs)) })
}

fn a3() -> Check {
    let (kernel, regime) = bgk_alpha_one()?;
    let kappa = kappa_for(&kernel, &regime)?.kappa;
    let mut grid = Vec::new();
    for p in [0.0, 0.5, 1.0, 2.0, 4.0] {
        for k in [0.1, 0.5, 1.0, 2.0, 5.0] {
            for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
                grid.push((p, k, eps));
            }
        }
    }
    let excess = grid
        .par_iter()
        .map(|&(p, k, eps)| {
            let s = a_eps(&kernel, &regime, p, &[k, 0.0, 0.0], eps)?;
            Ok(s.a_eps.norm() - (p + kappa * k))
        })
        .collect::<fraclim_core::Result<Vec<f64>>>()?;
    let worst = excess.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(Measured {
        measured: worst,
        target: 0.0,
        tolerance: 1e-8,
        pass: worst <= 1e-8,
        detail: format!("max of |a| - |p| - κ|k|^α over {} points", grid.len()),
    })
}

fn a4() -> Check {
    let eq = power_eq(1, 1.5)?;
    let kernels = [
        CollisionKernel::bgk(eq.clone()),
        CollisionKernel::new(eq.clone(), KernelKind::Separable, 0.5)?,
        CollisionKernel::new(eq.clone(), KernelKind::Shifted, 0.5)?,
        CollisionKernel::new(eq.clone(), KernelKind::Physical, -0.3)?,
    ];
    let spec = GridSpec { r_outer: 1e3, radial_panels: 12, nodes_per_panel: 8, angular_nodes: 1 };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = 0;
    let mut worst_ratio = 0.0f64;
    let mut detail = Vec::new();
    for kernel in &kernels {
        let op = DiscreteOperator::new(kernel, VelocityGrid::new(&eq, spec)?)?;
        // the bound constant is the supremum over the grid velocities
        let probes: Vec<Vector> = op.grid().nodes().iter().filter(|v| v[0] >= 0.0).copied().collect();
        let b3 = kernel.b3_check(&probes, B3Mode::Anomalous)?;
        if !b3.pass {
            failures += 100;
            detail.push(format!("{}: bound check failed", kernel.kind().name()));
            continue;
        }
        for _ in 0..100 {
            let f: Vec<f64> = op
                .equilibrium()
                .iter()
                .map(|fe| fe * (0.5 + 2.0 * ((rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64)))
                .collect();
            let r = op.coercivity_check(&f, Some(b3.m_observed))?;
            if !r.pass {
                failures += 1;
            }
            if r.rhs < 0.0 {
                worst_ratio = worst_ratio.max(r.lhs / r.rhs);
            }
        }
        detail.push(format!("{} M = {:.4}", kernel.kind().name(), b3.m_observed));
    }
    Ok(Measured {
        measured: failures as f64,
        target: 0.0,
        tolerance: 0.0,
        pass: failures == 0,
        detail: format!("violations of 400 checks; min lhs/rhs {worst_ratio:.3}; {}", detail.join(", ")),
    })
}

/// Kinetic runs shared by A5 and A6.
struct KineticRuns {
    eps: Vec<f64>,
    theta: Vec<f64>,
    rel_l2: Vec<f64>,
    fluctuation: Vec<f64>,
}

const KINETIC_EPS: [f64; 3] = [0.04, 0.02, 0.01];

fn kinetic_runs(scale: f64) -> fraclim_core::Result<KineticRuns> {
    let (kernel, regime) = bgk_alpha_one()?;
    let kappa = kappa_for(&kernel, &regime)?;
    let eq = kernel.equilibrium_arc().clone();
    let op = DiscreteOperator::new(&kernel, VelocityGrid::default_for(&eq)?)?;
    let modes = ModeSet::periodic(1, 40.0, 256)?;
    let rho0 = DensityField::gaussian(&modes, 0.5)?;
    let horizon = 1.0;
    let limit = solve_fractional_heat(kappa.kappa * scale, kappa.gamma, &rho0, horizon)?;
    let mut out = KineticRuns { eps: Vec::new(), theta: Vec::new(), rel_l2: Vec::new(), fluctuation: Vec::new() };
    for eps in KINETIC_EPS {
        let tr = kinetic_density(&op, &regime, &rho0, eps, horizon, default_dt(horizon))?;
        out.eps.push(eps);
        out.theta.push(regime.theta(eps)?);
        out.rel_l2.push(tr.densities[0].relative_l2(&limit)?);
        out.fluctuation.push(tr.fluctuation_integral);
    }
    Ok(out)
}

fn a5(runs: &fraclim_core::Result<KineticRuns>) -> Check {
    let r = runs.as_ref().map_err(|e| e.clone())?;
    let (e02, e01) = (r.rel_l2[1], r.rel_l2[2]);
    Ok(Measured {
        measured: e02,
        target: 0.0,
        tolerance: 0.15,
        pass: e02 < 0.15 && e01 < e02,
        detail: format!("relative L² error at ε = 0.02: {e02:.4e}, at ε = 0.01: {e01:.4e}"),
    })
}

fn a6(runs: &fraclim_core::Result<KineticRuns>) -> Check {
    let r = runs.as_ref().map_err(|e| e.clone())?;
    let slope = loglog_slope(&r.theta, &r.fluctuation);
    Ok(Measured {
        measured: slope,
        target: 1.0,
        tolerance: 0.15,
        pass: (slope - 1.0).abs() <= 0.15,
        detail: format!("θ = {}, ∫‖g‖² = {}", sci(&r.theta), sci(&r.fluctuation)),
    })
}

fn critical_setup() -> fraclim_core::Result<(CollisionKernel, fraclim_core::scaling::ScalingRegime)> {
    let eq = power_eq(1, 1.5)?;
    let kernel = CollisionKernel::new(eq.clone(), KernelKind::Separable, 0.5)?;
    let regime = classify(1.5, 0.5, eq.ell())?;
    if regime.kind() != RegimeKind::Critical {
        return Err(fraclim_core::Error::UnsupportedRegime("α = 1.5, β = 0.5 did not classify as critical".into()));
    }
    Ok((kernel, regime))
}

fn a7() -> Check {
    let (kernel, regime) = critical_setup()?;
    let kv = kappa_for(&kernel, &regime)?;
    let closed = kv.closed_form.unwrap_or(kv.kappa);
    // θ of the critical regime carries the factor φ(ε) ln(1/ε), so d^ε
    // below is already the normalized quadratic part
    let errs = [1e-2, 1e-3, 1e-4]
        .par_iter()
        .map(|&e| d_eps(&kernel, &regime, 0.0, &[1.0, 0.0, 0.0], e).map(|d| rel(d, closed)))
        .collect::<fraclim_core::Result<Vec<f64>>>()?;
    let last = errs[2];
    Ok(Measured {
        measured: last,
        target: 0.0,
        tolerance: 0.1,
        pass: last < 0.1 && strictly_decreasing(&errs),
        detail: format!("κ = {closed:.6}; relative error over ε: {}", sci(&errs)),
    })
}

fn a8() -> Check {
    let eq = Arc::new(HeavyTailEquilibrium::maxwellian(1)?);
    let kernel = CollisionKernel::bgk(eq.clone());
    let regime = classify(f64::INFINITY, 0.0, eq.ell())?;
    let op = DiscreteOperator::new(&kernel, VelocityGrid::default_for(&eq)?)?;
    let d = op.solve_cell_problem()?.d;
    // ∫v² e^{-v²/2}/√(2π) dv = 1
    let d_err = (d[0][0] - 1.0).abs();
    let modes = ModeSet::periodic(1, 40.0, 256)?;
    let rho0 = DensityField::gaussian(&modes, 0.5)?;
    let horizon = 1.0;
    let limit = solve_classical_heat(&d, &rho0, horizon)?;
    // backward Euler relaxation perturbs D by O(dt/θ), and θ = ε² is small
    let errs = [0.1, 0.05]
        .iter()
        .map(|&e| {
            let dt = default_dt(horizon).min(regime.theta(e)? / 100.0);
            kinetic_density(&op, &regime, &rho0, e, horizon, dt)?.densities[0].relative_l2(&limit)
        })
        .collect::<fraclim_core::Result<Vec<f64>>>()?;
    Ok(Measured {
        measured: d_err,
        target: 0.0,
        tolerance: 1e-6,
        pass: d_err < 1e-6 && strictly_decreasing(&errs),
        detail: format!("D = {:.10}; kinetic vs heat over ε = 0.1, 0.05: {}", d[0][0], sci(&errs)),
    })
}

fn a9() -> Check {
    let eps = [1e-2, 1e-3, 1e-4];
    let k = [1.0, 0.0, 0.0];
    let (kernel, regime) = bgk_alpha_one()?;
    let frac = remainder_probe(&kernel, &regime, 1.0, &k, &eps)?;
    let (kernel, regime) = critical_setup()?;
    let crit = remainder_probe(&kernel, &regime, 1.0, &k, &eps)?;
    let margin = (frac.slope - frac.floor).min(crit.slope - crit.floor);
    Ok(Measured {
        measured: margin,
        target: 0.0,
        tolerance: 0.0,
        pass: frac.pass && crit.pass,
        detail: format!(
            "slope minus floor; fractional slope {:.4} (floor {:.2}), critical slope {:.4} (floor {:.2})",
            frac.slope, frac.floor, crit.slope, crit.floor
        ),
    })
}

fn a10(scale: f64) -> Check {
    let (kernel, regime) = bgk_alpha_one()?;
    let kv = kappa_for(&kernel, &regime)?;
    let (eps, horizon) = (0.02, 1.0);
    let params = JumpProcessParams::new(eps, horizon, 1_000_000, 10).with_snapshots(&[0.125, 0.25, 0.5]);
    let sim = simulate(&kernel, &regime, &params)?;
    let ks: Vec<Vector> = [0.5, 1.0, 2.0].iter().map(|k| [*k, 0.0, 0.0]).collect();
    let cf = empirical_cf(sim.last(), &ks)?;
    let z: Vec<f64> = cf
        .iter()
        .map(|c| (c.value.norm() - limit_cf(kv.kappa * scale, kv.gamma, &c.k, horizon)) / c.se_abs)
        .collect();
    let worst = z.iter().fold(0.0f64, |m, z| m.max(z.abs()));
    let rep = displacement_scaling(&sim.snapshots, 0.5)?;
    let target = 1.0 / kv.gamma;
    let pass = worst <= 3.0 && rep.matches(target, 0.05);
    // the same characteristic function from the kinetic equation at this ε
    // separates sampling error from the finite-ε distance to the limit
    let op = DiscreteOperator::new(&kernel, VelocityGrid::default_for(kernel.equilibrium_arc())?)?;
    let modes = ModeSet::from_modes(1, 1.0, ks.clone())?;
    let f0 = PhaseSpaceField::well_prepared(&op, &DensityField::point_mass(&modes), eps, regime.clone())?;
    let tr = solve_kinetic(&op, &f0, horizon, regime.theta(eps)? / 400.0, &[horizon])?;
    let z_kin: Vec<f64> = cf
        .iter()
        .zip(&tr.densities[0].amplitudes)
        .map(|(c, a)| (c.value.norm() - a.norm()) / c.se_abs)
        .collect();
    Ok(Measured {
        measured: worst,
        target: 0.0,
        tolerance: 3.0,
        pass,
        detail: format!(
            "|cf| = {}, limit z-scores {}; kinetic |ρ̂| at this ε = {}, z-scores against it {}; quantile slope {:.4} (target {target} ± 0.05)",
            sci(&cf.iter().map(|c| c.value.norm()).collect::<Vec<_>>()),
            fixed(&z),
            sci(&tr.densities[0].amplitudes.iter().map(|a| a.norm()).collect::<Vec<_>>()),
            fixed(&z_kin),
            rep.slope
        ),
    })
}

fn a11() -> Check {
    let one = SlowVaryingFn::one();
    let mut bad = Vec::new();
    // β = 0 gives γ = α
    for i in 1..200 {
        let alpha = 0.01 * i as f64;
        let r = classify(alpha, 0.0, &one)?;
        if r.kind() != RegimeKind::Fractional || r.gamma() != alpha {
            bad.push(format!("β=0, α={alpha}"));
        }
    }
    // γ(β) is monotone, with direction sign(α - 1)
    for alpha in [0.3, 0.7, 1.0, 1.3, 1.7] {
        let top = f64::min(alpha, 2.0 - alpha);
        let gammas: Vec<f64> = (0..2000)
            .map(|i| -5.0 + (top - 1e-9 + 5.0) * i as f64 / 1999.0)
            .map(|b| classify(alpha, b, &one).map(|r| (r.kind(), r.gamma())))
            .collect::<fraclim_core::Result<Vec<_>>>()?
            .into_iter()
            .map(|(kind, g)| if kind == RegimeKind::Fractional { g } else { f64::NAN })
            .collect();
        let ok = gammas.windows(2).all(|w| {
            if alpha > 1.0 {
                w[1] > w[0]
            } else if alpha < 1.0 {
                w[1] < w[0]
            } else {
                w[1] == w[0]
            }
        });
        if !ok {
            bad.push(format!("γ(β) not monotone at α={alpha}"));
        }
    }
    // β > 2 - α with α > 1 is classical
    for alpha in [1.1, 1.5, 1.9, 2.5, 4.0] {
        let lo = 2.0 - alpha;
        for i in 1..100 {
            let beta = lo + (1.0 - lo) * i as f64 / 100.0;
            if classify(alpha, beta, &one)?.kind() != RegimeKind::Classical {
                bad.push(format!("α={alpha}, β={beta} not classical"));
            }
        }
    }
    Ok(Measured {
        measured: bad.len() as f64,
        target: 0.0,
        tolerance: 0.0,
        pass: bad.is_empty(),
        detail: if bad.is_empty() { "all maps reproduced".into() } else { bad.join("; ") },
    })
}

fn a12() -> Check {
    let eq = power_eq(1, 1.5)?;
    let probes: Vec<Vector> = geomspace(0.1, 1e3, 6).into_iter().map(|r| [r, 0.0, 0.0]).collect();
    let radii = geomspace(1e2, 1e4, 9);
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut detail = Vec::new();
    for beta in [-0.3, 0.0, 0.5] {
        let kernel = CollisionKernel::new(eq.clone(), KernelKind::Physical, beta)?;
        let nu = radii.iter().map(|r| kernel.nu_radial(*r)).collect::<fraclim_core::Result<Vec<f64>>>()?;
        let slope = loglog_slope(&radii, &nu);
        worst = worst.max((slope - beta).abs());
        let b3 = kernel.b3_check(&probes, B3Mode::Anomalous)?;
        ok &= b3.pass && (slope - beta).abs() <= 0.05;
        detail.push(format!("β={beta}: slope {slope:.4}, M {:.3}", b3.m_observed));
    }
    // the window is (-min(α, N/2), min(α, N)) = (-0.5, 1)
    for beta in [-0.6, 1.2] {
        let kernel = CollisionKernel::new_unchecked(eq.clone(), KernelKind::Physical, beta)?;
        let b3 = kernel.b3_check(&probes, B3Mode::Anomalous)?;
        ok &= !b3.pass;
        detail.push(format!("β={beta}: bound {}", if b3.pass { "passes (wrong)" } else { "fails" }));
    }
    Ok(Measured { measured: worst, target: 0.0, tolerance: 0.05, pass: ok, detail: detail.join("; ") })
}
