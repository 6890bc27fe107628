use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fraclim::config::{EllConfig, EllKind, Operation};
use fraclim::sweep::{with_threads, write_modes, write_profiles, ModeEquation};
use fraclim::{run_sweep, AcceptanceOptions, ExperimentConfig, HarnessError};
use serde_json::json;

/// Fractional diffusion limits of linear kinetic equations.
#[derive(Parser, Debug)]
#[command(name = "fraclim", version)]
struct Cli {
    /// Experiment configuration (TOML); built-in defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte Carlo seed (overrides `mc.seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; all cores by default.
    #[arg(long, global = true, env = fraclim::THREADS_ENV)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the scaling regime of the configured (α, β, ℓ).
    Classify {
        /// Tail exponent (overrides `equilibrium.alpha`).
        #[arg(long)]
        alpha: Option<f64>,
        /// Kernel exponent (overrides `kernel.beta`).
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        /// Slowly varying factor: `one`, `constant:c`, `power_log:p` or
        /// `iterated_log`; anything but `one` implies a non-exact tail.
        #[arg(long, value_parser = parse_ell)]
        ell: Option<EllConfig>,
    },
    /// Print the limit coefficient κ (or D in the classical regime).
    Kappa,
    /// Symbol over the ε × k × p grid; writes symbol.csv/json.
    SymbolSweep,
    /// Kinetic vs limit densities for each ε; writes solve.csv/json and
    /// profiles.csv (`eps,x,kinetic,limit`).
    Solve {
        /// Points of the written profiles.
        #[arg(long, default_value_t = 512)]
        points: usize,
        /// Also write modes.csv with the Fourier amplitudes of these
        /// equations at the horizon.
        #[arg(long, value_enum, value_delimiter = ',')]
        equation: Vec<EquationArg>,
    },
    /// Jump-process simulation for each ε; writes mc.csv/json.
    Mc {
        /// Snapshot times (overrides `mc.snapshots`).
        #[arg(long, value_delimiter = ',')]
        snapshots: Option<Vec<f64>>,
    },
    /// The sweep named by `sweep.operation`.
    Sweep,
    /// Acceptance suite; writes acceptance.json.
    Accept {
        /// Comma-separated criteria, e.g. `A1,A11`.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// Multiplies the limit coefficients the criteria compare with.
        #[arg(long, default_value_t = 1.0)]
        kappa_scale: f64,
    },
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum EquationArg {
    Kinetic,
    Frac,
    Heat,
}

impl From<EquationArg> for ModeEquation {
    fn from(e: EquationArg) -> Self {
        match e {
            EquationArg::Kinetic => ModeEquation::Kinetic,
            EquationArg::Frac => ModeEquation::Frac,
            EquationArg::Heat => ModeEquation::Heat,
        }
    }
}

fn parse_ell(s: &str) -> Result<EllConfig, String> {
    let (kind, value) = match s.split_once(':') {
        Some((k, v)) => (k, Some(v.parse::<f64>().map_err(|e| format!("{v}: {e}"))?)),
        None => (s, None),
    };
    let kind = match kind {
        "one" => EllKind::One,
        "constant" => EllKind::Constant,
        "power_log" => EllKind::PowerLog,
        "iterated_log" => EllKind::IteratedLog,
        other => return Err(format!("unknown slowly varying factor `{other}`")),
    };
    Ok(EllConfig { kind, value: value.unwrap_or(EllConfig::default().value) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("fraclim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load(cli: &Cli) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(dir) = &cli.out {
        cfg.output.dir = dir.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.mc.seed = seed;
    }
    Ok(cfg)
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn run(cli: Cli) -> Result<u8, HarnessError> {
    if cli.threads == Some(0) {
        return Err(HarnessError::Config("--threads must be at least 1".into()));
    }
    let mut cfg = load(&cli)?;
    let threads = cli.threads;
    let op = match &cli.command {
        Command::Classify { alpha, beta, ell } => {
            if let Some(a) = alpha {
                cfg.equilibrium.alpha = *a;
            }
            if let Some(b) = beta {
                cfg.kernel.beta = *b;
            }
            if let Some(l) = ell {
                // an exact power tail only carries ℓ ≡ 1
                cfg.equilibrium.tail_exact &= l.kind == EllKind::One;
                cfg.equilibrium.ell = l.clone();
            }
            let r = &cfg.regime()?;
            print_json(&json!({
                "alpha": r.alpha(),
                "beta": r.beta(),
                "kind": r.kind().name(),
                "gamma": r.gamma(),
                "theta": r.theta_formula(),
                "fallback_to_classical": r.fallback_to_classical(),
                "config_hash": cfg.hash(),
            }));
            return Ok(0);
        }
        Command::Kappa => {
            let exp = cfg.validate()?;
            let kv = with_threads(threads, || exp.kappa())?.map_err(|e| HarnessError::Core(e.to_string()))?;
            print_json(&json!({
                "kind": kv.kind.name(),
                "gamma": kv.gamma,
                "kappa": kv.kappa,
                "method": kv.method.name(),
                "closed_form": kv.closed_form,
                "quadrature": kv.quadrature,
                "relative_gap": kv.relative_gap(),
                "nu0": exp.kernel.nu0(),
                "config_hash": cfg.hash(),
            }));
            return Ok(0);
        }
        Command::Accept { only, kappa_scale } => {
            let opts = AcceptanceOptions { only: only.clone(), kappa_scale: *kappa_scale };
            let report = with_threads(threads, || {
                fraclim::acceptance::run_acceptance_with(&opts, |c| println!("{}", c.line()))
            })?;
            std::fs::create_dir_all(&cfg.output.dir)?;
            let path = cfg.output.dir.join("acceptance.json");
            std::fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")?;
            eprintln!("report written to {}", path.display());
            return Ok(if report.all_pass() { 0 } else { 1 });
        }
        Command::SymbolSweep => Operation::Symbol,
        Command::Solve { .. } => Operation::Solve,
        Command::Mc { snapshots } => {
            if let Some(t) = snapshots {
                cfg.mc.snapshots = t.clone();
            }
            Operation::Mc
        }
        Command::Sweep => cfg.sweep.operation,
    };
    cfg.sweep.operation = op;
    let exp = cfg.validate()?;
    let outcome = run_sweep(&exp, threads)?;
    if let Command::Solve { points, equation } = &cli.command {
        let path = cfg.output.dir.join("profiles.csv");
        with_threads(threads, || write_profiles(&exp, &path, *points))??;
        if !equation.is_empty() {
            let eqs: Vec<ModeEquation> = equation.iter().map(|&e| e.into()).collect();
            let path = cfg.output.dir.join("modes.csv");
            with_threads(threads, || write_modes(&exp, &path, &eqs))??;
        }
    }
    for f in &outcome.files {
        eprintln!("wrote {}", f.display());
    }
    let failed = outcome.failures();
    eprintln!("{} cells, {failed} failed", outcome.records.len());
    for r in outcome.records.iter().filter(|r| r.failed()) {
        eprintln!("cell {}: {}", r.cell, r.error.as_deref().unwrap_or(""));
    }
    Ok(if failed > 0 { 1 } else { 0 })
}
