//! Sweeps over the cross-product of the configured axes.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use fraclim_core::montecarlo::{
    displacement_quantile, displacement_scaling, empirical_cf, limit_cf, simulate, velocity_ks, JumpProcessParams,
};
use fraclim_core::scaling::RegimeKind;
use fraclim_core::solvers::{default_dt, kinetic_density, solve_classical_heat, solve_fractional_heat, DensityField};
use fraclim_core::symbol::{a_eps, limit_symbol, KappaValue};
use fraclim_core::collision::DiscreteOperator;
use rayon::prelude::*;

use crate::config::{Experiment, Operation};
use crate::record::{write_curve, Appender, ResultRecord, CODE_VERSION};
use crate::HarnessError;

pub const DEFAULT_EPS: f64 = 1e-2;
pub const DEFAULT_K: f64 = 1.0;
pub const DEFAULT_P: f64 = 1.0;

/// Result of [`run_sweep`].
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub records: Vec<ResultRecord>,
    pub files: Vec<PathBuf>,
}

impl SweepOutcome {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.failed()).count()
    }
}

/// Runs `f` on a pool of `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    eps: f64,
    k: f64,
    p: f64,
}

fn axis(values: &[f64], default: f64) -> Vec<f64> {
    if values.is_empty() { vec![default] } else { values.to_vec() }
}

fn cells(exp: &Experiment) -> Vec<Cell> {
    let s = &exp.config.sweep;
    let eps = axis(&s.eps, DEFAULT_EPS);
    let ks = axis(&s.k, DEFAULT_K);
    let ps = axis(&s.p, DEFAULT_P);
    match s.operation {
        Operation::Symbol => {
            let mut out = Vec::new();
            for &e in &eps {
                for &k in &ks {
                    for &p in &ps {
                        out.push(Cell { eps: e, k, p });
                    }
                }
            }
            out
        }
        Operation::Kappa => vec![Cell { eps: f64::NAN, k: f64::NAN, p: f64::NAN }],
        Operation::Solve | Operation::Mc => eps.iter().map(|&e| Cell { eps: e, k: f64::NAN, p: f64::NAN }).collect(),
    }
}

type Outputs = BTreeMap<String, f64>;

/// Shared, expensive state of a sweep.
struct Context<'a> {
    exp: &'a Experiment,
    kappa: Result<KappaValue, String>,
    op: Option<DiscreteOperator>,
    rho0: Option<DensityField>,
}

/// Executes every cell of the sweep (in parallel), then writes all records
/// through one appender. A failing cell is recorded and the sweep goes on.
pub fn run_sweep(exp: &Experiment, threads: Option<usize>) -> Result<SweepOutcome, HarnessError> {
    let cfg = &exp.config;
    let op_kind = cfg.sweep.operation;
    let hash = cfg.hash();
    let setup = Instant::now();
    let ctx = with_threads(threads, || {
        let kappa = exp.kappa().map_err(|e| e.to_string());
        let (op, rho0) = if op_kind == Operation::Solve {
            (exp.operator().ok(), exp.initial_density().ok())
        } else {
            (None, None)
        };
        Context { exp, kappa, op, rho0 }
    })?;
    let setup_time = setup.elapsed().as_secs_f64();
    let list = cells(exp);
    let results: Vec<(Result<Outputs, String>, f64)> = with_threads(threads, || {
        list.par_iter()
            .map(|c| {
                let t = Instant::now();
                let out = run_cell(&ctx, op_kind, c);
                (out, t.elapsed().as_secs_f64())
            })
            .collect()
    })?;
    let mut records = Vec::with_capacity(list.len());
    for (i, (c, (out, secs))) in list.iter().zip(results).enumerate() {
        let mut inputs = BTreeMap::new();
        for (name, v) in [("eps", c.eps), ("k", c.k), ("p", c.p)] {
            if !v.is_nan() {
                inputs.insert(name.to_string(), v);
            }
        }
        let (outputs, error) = match out {
            Ok(o) => (o, None),
            Err(e) => (BTreeMap::new(), Some(e)),
        };
        records.push(ResultRecord {
            config_hash: hash.clone(),
            module: op_kind.module().into(),
            operation: op_kind.name().into(),
            cell: i,
            inputs,
            outputs,
            tolerances: tolerances(op_kind),
            error,
            wall_time_s: secs + if i == 0 { setup_time } else { 0.0 },
            code_version: CODE_VERSION.into(),
        });
    }
    let mut appender = Appender::open(&cfg.output.dir)?;
    for r in &records {
        appender.append(r)?;
    }
    let files = appender.write_tables(op_kind.name(), &cfg.to_toml(), &records, &cfg.output.formats, column_order(op_kind))?;
    Ok(SweepOutcome { records, files })
}

/// Leading CSV columns per operation.
pub fn column_order(op: Operation) -> &'static [&'static str] {
    match op {
        Operation::Symbol => &[
            "eps", "k", "p", "re_a", "im_a", "drift", "d_eps", "c_remainder", "limit", "abs_err", "theta",
        ],
        Operation::Kappa => &["kappa", "gamma", "closed_form", "quadrature", "relative_gap", "nu0"],
        Operation::Solve => &["eps", "theta", "rel_l2", "fluctuation_integral", "mass_drift", "steps", "dt"],
        Operation::Mc => &["eps", "msd", "msd_se", "quantile_slope", "velocity_ks", "jumps", "acceptance"],
    }
}

fn tolerances(op: Operation) -> BTreeMap<String, f64> {
    let pairs: &[(&str, f64)] = match op {
        Operation::Symbol => &[("radial_rel", 1e-10), ("angular_rel", 1e-12)],
        Operation::Kappa => &[("quadrature_rel", 1e-10)],
        Operation::Solve => &[("norm_growth", 1e-6), ("sub_iteration", 1e-10)],
        Operation::Mc => &[("min_acceptance", 1e-3)],
    };
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn run_cell(ctx: &Context, op: Operation, c: &Cell) -> Result<Outputs, String> {
    let exp = ctx.exp;
    let kv = ctx.kappa.clone();
    let mut o = Outputs::new();
    let mut put = |k: &str, v: f64| {
        o.insert(k.to_string(), v);
    };
    match op {
        Operation::Kappa => {
            let kv = kv?;
            put("kappa", kv.kappa);
            put("gamma", kv.gamma);
            if let Some(x) = kv.closed_form {
                put("closed_form", x);
            }
            if let Some(x) = kv.quadrature {
                put("quadrature", x);
            }
            if let Some(x) = kv.relative_gap() {
                put("relative_gap", x);
            }
            put("nu0", exp.kernel.nu0());
        }
        Operation::Symbol => {
            let k = [c.k, 0.0, 0.0];
            let s = a_eps(&exp.kernel, &exp.regime, c.p, &k, c.eps).map_err(|e| e.to_string())?;
            put("theta", s.theta);
            put("re_a", s.a_eps.re);
            put("im_a", s.a_eps.im);
            put("drift", s.drift_signed());
            put("d_eps", s.d_eps);
            put("c_remainder", s.c_remainder);
            if let Ok(kv) = kv {
                let lim = limit_symbol(&kv, c.p, &k);
                put("limit", lim);
                put("abs_err", (s.a_eps.re - lim).hypot(s.a_eps.im));
            }
        }
        Operation::Solve => {
            let kv = kv?;
            let (Some(opr), Some(rho0)) = (&ctx.op, &ctx.rho0) else {
                return Err("velocity grid or initial data could not be built".into());
            };
            let s = &exp.config.solver;
            let dt = s.dt.unwrap_or_else(|| default_dt(s.horizon));
            let tr = kinetic_density(opr, &exp.regime, rho0, c.eps, s.horizon, dt).map_err(|e| e.to_string())?;
            let limit = limit_density(exp, &kv, rho0, s.horizon).map_err(|e| e.to_string())?;
            let theta = exp.regime.theta(c.eps).map_err(|e| e.to_string())?;
            put("theta", theta);
            put("rel_l2", tr.densities[0].relative_l2(&limit).map_err(|e| e.to_string())?);
            put("fluctuation_integral", tr.fluctuation_integral);
            put("mass_drift", tr.mass_drift());
            put("steps", tr.steps as f64);
            put("dt", tr.dt);
        }
        Operation::Mc => {
            let m = &exp.config.mc;
            let params = JumpProcessParams::new(c.eps, m.horizon, m.particles, m.seed).with_snapshots(&m.snapshots);
            let sim = simulate(&exp.kernel, &exp.regime, &params).map_err(|e| e.to_string())?;
            let ks: Vec<[f64; 3]> = axis(&exp.config.sweep.k, DEFAULT_K).iter().map(|k| [*k, 0.0, 0.0]).collect();
            let cf = empirical_cf(sim.last(), &ks).map_err(|e| e.to_string())?;
            for est in &cf {
                let tag = format!("[{:?}]", est.k[0]);
                put(&format!("cf_re{tag}"), est.value.re);
                put(&format!("cf_se{tag}"), est.se_re);
                if let Ok(kv) = &kv {
                    put(&format!("cf_limit{tag}"), limit_cf(kv.kappa, kv.gamma, &est.k, m.horizon));
                }
            }
            let (msd, msd_se) = sim.last().mean_square_displacement();
            put("msd", msd);
            put("msd_se", msd_se);
            put("jumps", sim.jumps as f64);
            put("acceptance", sim.acceptance());
            if let Ok(rep) = displacement_scaling(&sim.snapshots, m.quantile) {
                put("quantile_slope", rep.slope);
            }
            for snap in &sim.snapshots {
                if let Ok((q, _)) = displacement_quantile(snap, m.quantile) {
                    put(&format!("quantile[{:?}]", snap.time), q);
                }
            }
            put("velocity_ks", velocity_ks(sim.last(), &exp.eq).map_err(|e| e.to_string())?);
        }
    }
    Ok(o)
}

/// Solution of the limit equation from `ρ₀` at `horizon`.
pub fn limit_density(
    exp: &Experiment,
    kv: &KappaValue,
    rho0: &DensityField,
    horizon: f64,
) -> fraclim_core::Result<DensityField> {
    match exp.regime.kind() {
        RegimeKind::Classical if exp.config.regime.kappa.is_none() => {
            let d = exp.operator()?.solve_cell_problem()?.d;
            solve_classical_heat(&d, rho0, horizon)
        }
        _ => solve_fractional_heat(kv.kappa, kv.gamma, rho0, horizon),
    }
}

/// Kinetic and limit densities on `points` (1-D: first coordinate) for
/// every ε of the sweep; columns `eps,x,kinetic,limit`.
pub fn write_profiles(exp: &Experiment, path: &std::path::Path, points: usize) -> Result<(), HarnessError> {
    let core = |e: fraclim_core::Error| HarnessError::Core(e.to_string());
    let kv = exp.kappa().map_err(core)?;
    let op = exp.operator().map_err(core)?;
    let rho0 = exp.initial_density().map_err(core)?;
    let s = &exp.config.solver;
    let dt = s.dt.unwrap_or_else(|| default_dt(s.horizon));
    let limit = limit_density(exp, &kv, &rho0, s.horizon).map_err(core)?;
    let xs: Vec<[f64; 3]> = (0..points).map(|i| [s.box_len * i as f64 / points as f64, 0.0, 0.0]).collect();
    let lim_vals = limit.eval(&xs);
    let mut rows = Vec::new();
    for &eps in &axis(&exp.config.sweep.eps, DEFAULT_EPS) {
        let tr = kinetic_density(&op, &exp.regime, &rho0, eps, s.horizon, dt).map_err(core)?;
        let kin = tr.densities[0].eval(&xs);
        for ((x, a), b) in xs.iter().zip(kin).zip(&lim_vals) {
            rows.push(vec![eps, x[0], a, *b]);
        }
    }
    write_curve(path, &["eps", "x", "kinetic", "limit"], &rows)
}

/// Which density a mode table holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeEquation {
    /// The kinetic density, one block per ε of the sweep.
    Kinetic,
    /// The fractional heat equation with the configured κ and γ.
    Frac,
    /// The classical heat equation with the cell-problem diffusion matrix.
    Heat,
}

impl ModeEquation {
    pub fn name(self) -> &'static str {
        match self {
            ModeEquation::Kinetic => "kinetic",
            ModeEquation::Frac => "frac",
            ModeEquation::Heat => "heat",
        }
    }
}

/// Fourier amplitudes at the horizon; columns `equation,eps,k1..kd,re,im`.
/// `eps` is empty for the limit equations.
pub fn write_modes(exp: &Experiment, path: &std::path::Path, equations: &[ModeEquation]) -> Result<(), HarnessError> {
    let core = |e: fraclim_core::Error| HarnessError::Core(e.to_string());
    let rho0 = exp.initial_density().map_err(core)?;
    let s = &exp.config.solver;
    let dim = rho0.modes.dim();
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["equation".to_string(), "eps".into()];
    header.extend((1..=dim).map(|i| format!("k{i}")));
    header.extend(["re".into(), "im".into()]);
    w.write_record(&header)?;
    let mut emit = |eq: ModeEquation, eps: Option<f64>, field: &DensityField| -> Result<(), HarnessError> {
        for (k, a) in field.modes.modes().iter().zip(&field.amplitudes) {
            let mut row = vec![eq.name().to_string(), eps.map(|e| format!("{e:?}")).unwrap_or_default()];
            row.extend(k[..dim].iter().map(|x| format!("{x:?}")));
            row.extend([format!("{:?}", a.re), format!("{:?}", a.im)]);
            w.write_record(&row)?;
        }
        Ok(())
    };
    for &eq in equations {
        match eq {
            ModeEquation::Kinetic => {
                let op = exp.operator().map_err(core)?;
                let dt = s.dt.unwrap_or_else(|| default_dt(s.horizon));
                for &eps in &axis(&exp.config.sweep.eps, DEFAULT_EPS) {
                    let tr = kinetic_density(&op, &exp.regime, &rho0, eps, s.horizon, dt).map_err(core)?;
                    emit(eq, Some(eps), &tr.densities[0])?;
                }
            }
            ModeEquation::Frac => {
                let kv = exp.kappa().map_err(core)?;
                emit(eq, None, &solve_fractional_heat(kv.kappa, kv.gamma, &rho0, s.horizon).map_err(core)?)?;
            }
            ModeEquation::Heat => {
                let d = exp.operator().and_then(|op| op.solve_cell_problem()).map_err(core)?.d;
                emit(eq, None, &solve_classical_heat(&d, &rho0, s.horizon).map_err(core)?)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
