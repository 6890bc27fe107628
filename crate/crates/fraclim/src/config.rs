//! Experiment configuration (TOML, one file per experiment).

use std::path::{Path, PathBuf};
use std::sync::Arc;

use fraclim_core::collision::{CollisionKernel, DiscreteOperator, GridSpec, KernelKind, VelocityGrid};
use fraclim_core::equilibria::{CoreProfile, EquilibriumSpec, HeavyTailEquilibrium, SlowVaryingFn};
use fraclim_core::scaling::{classify, RegimeKind, ScalingRegime};
use fraclim_core::solvers::{DensityField, ModeSet};
use fraclim_core::symbol::{kappa_for, KappaMethod, KappaValue};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::HarnessError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub equilibrium: EquilibriumConfig,
    pub kernel: KernelConfig,
    pub regime: RegimeConfig,
    pub solver: SolverConfig,
    pub mc: McConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Core plus `κ₀|v|^{-N-α}` tail.
    PowerTail,
    /// Standard Gaussian, no tail.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoreShape {
    Uniform,
    Maxwellian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquilibriumConfig {
    pub profile: Profile,
    pub dim: usize,
    pub alpha: f64,
    pub kappa0: f64,
    pub r_cut: f64,
    pub core: CoreShape,
    pub tail_exact: bool,
    pub ell: EllConfig,
}

impl Default for EquilibriumConfig {
    fn default() -> Self {
        Self {
            profile: Profile::PowerTail,
            dim: 1,
            alpha: 1.0,
            kappa0: 1.0,
            r_cut: 1.0,
            core: CoreShape::Uniform,
            tail_exact: true,
            ell: EllConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EllKind {
    One,
    Constant,
    PowerLog,
    IteratedLog,
}

/// Slowly varying factor of the tail. `value` is `c` for `constant` and the
/// exponent `p` for `power_log`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EllConfig {
    pub kind: EllKind,
    pub value: f64,
}

impl Default for EllConfig {
    fn default() -> Self {
        Self { kind: EllKind::One, value: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    /// `bgk`, `separable`, `shifted` or `physical`.
    pub kind: String,
    pub beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu0: Option<f64>,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { kind: "bgk".into(), beta: 0.0, nu0: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaChoice {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegimeConfig {
    /// Replaces the computed limit coefficient.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    pub kappa_method: KappaChoice,
}

impl Default for RegimeConfig {
    fn default() -> Self {
        Self { kappa: None, kappa_method: KappaChoice::ClosedForm }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialData {
    Gaussian,
    PointMass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub box_len: f64,
    /// Fourier modes per axis.
    pub modes: usize,
    pub horizon: f64,
    /// Time step; `horizon/2048` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub initial: InitialData,
    pub width: f64,
    /// Velocity grid; the per-equilibrium default when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            box_len: 40.0,
            modes: 256,
            horizon: 1.0,
            dt: None,
            initial: InitialData::Gaussian,
            width: 0.5,
            grid: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub r_outer: f64,
    pub radial_panels: usize,
    pub nodes_per_panel: usize,
    pub angular_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub particles: usize,
    #[serde(with = "seed_repr")]
    pub seed: u64,
    pub horizon: f64,
    pub snapshots: Vec<f64>,
    /// Quantile of `|x|` used for the displacement exponent.
    pub quantile: f64,
}

/// TOML integers are signed: seeds of 2⁶³ and above are stored as their
/// two's-complement `i64`.
mod seed_repr {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i64(*seed as i64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        i64::deserialize(d).map(|x| x as u64)
    }
}

impl Default for McConfig {
    fn default() -> Self {
        Self { particles: 100_000, seed: 1, horizon: 1.0, snapshots: vec![0.125, 0.25, 0.5], quantile: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    Symbol,
    Kappa,
    Solve,
    Mc,
}

impl Operation {
    pub fn name(&self) -> &'static str {
        match self {
            Operation::Symbol => "symbol",
            Operation::Kappa => "kappa",
            Operation::Solve => "solve",
            Operation::Mc => "mc",
        }
    }

    pub fn module(&self) -> &'static str {
        match self {
            Operation::Symbol | Operation::Kappa => "symbol",
            Operation::Solve => "solvers",
            Operation::Mc => "montecarlo",
        }
    }
}

/// Sweep axes. Empty axes fall back to a single default value
/// (`ε = 10⁻²`, `k = 1`, `p = 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub operation: Operation,
    pub eps: Vec<f64>,
    pub k: Vec<f64>,
    pub p: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { operation: Operation::Symbol, eps: Vec::new(), k: Vec::new(), p: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("fraclim-out"), formats: vec![Format::Csv, Format::Json] }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Full TOML form, defaults included.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// The scaling regime of (α, β, ℓ), without building a kernel.
    pub fn regime(&self) -> Result<ScalingRegime, HarnessError> {
        let eq = self.equilibrium()?;
        classify(eq.alpha(), self.kernel.beta, eq.ell()).map_err(invalid)
    }

    fn equilibrium(&self) -> Result<HeavyTailEquilibrium, HarnessError> {
        let e = &self.equilibrium;
        match e.profile {
            Profile::Gaussian => HeavyTailEquilibrium::maxwellian(e.dim),
            Profile::PowerTail => {
                let ell = match e.ell.kind {
                    EllKind::One => Ok(SlowVaryingFn::one()),
                    EllKind::Constant => SlowVaryingFn::constant(e.ell.value),
                    EllKind::PowerLog => SlowVaryingFn::power_log(e.ell.value),
                    EllKind::IteratedLog => Ok(SlowVaryingFn::iterated_log()),
                }
                .map_err(invalid)?;
                HeavyTailEquilibrium::new(EquilibriumSpec {
                    dim: e.dim,
                    alpha: e.alpha,
                    kappa0: e.kappa0,
                    ell,
                    r_cut: e.r_cut,
                    core: match e.core {
                        CoreShape::Uniform => CoreProfile::Uniform,
                        CoreShape::Maxwellian => CoreProfile::Maxwellian,
                    },
                    tail_exact: e.tail_exact,
                })
            }
        }
        .map_err(invalid)
    }

    /// Builds the equilibrium, kernel and regime, rejecting parameter sets
    /// outside the limit theorems.
    pub fn validate(&self) -> Result<Experiment, HarnessError> {
        let eq = Arc::new(self.equilibrium()?);
        // the theorem hypotheses first, then the kernel's own window
        let regime = classify(eq.alpha(), self.kernel.beta, eq.ell()).map_err(invalid)?;
        let kind: KernelKind = self.kernel.kind.parse().map_err(invalid)?;
        let mut kernel = match kind {
            KernelKind::Bgk if self.kernel.beta != 0.0 => {
                return Err(HarnessError::Config(format!("bgk needs β = 0, got β = {}", self.kernel.beta)))
            }
            KernelKind::Bgk => CollisionKernel::bgk(eq.clone()),
            _ => CollisionKernel::new(eq.clone(), kind, self.kernel.beta).map_err(invalid)?,
        };
        if let Some(nu0) = self.kernel.nu0 {
            kernel = kernel.with_nu0(nu0).map_err(invalid)?;
        }
        let s = &self.solver;
        if !(s.box_len > 0.0 && s.modes > 0 && s.horizon > 0.0 && s.width > 0.0) {
            return Err(HarnessError::Config("solver needs box_len, modes, horizon, width > 0".into()));
        }
        if s.dt.is_some_and(|dt| !(dt > 0.0 && dt <= s.horizon)) {
            return Err(HarnessError::Config("solver dt must lie in (0, horizon]".into()));
        }
        let m = &self.mc;
        if !(m.horizon > 0.0 && m.quantile > 0.0 && m.quantile < 1.0) {
            return Err(HarnessError::Config("mc needs horizon > 0 and 0 < quantile < 1".into()));
        }
        if m.snapshots.iter().any(|t| !(*t > 0.0 && *t < m.horizon)) {
            return Err(HarnessError::Config("mc snapshots must lie in (0, horizon)".into()));
        }
        if self.sweep.eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return Err(HarnessError::Config("every ε must satisfy 0 < ε < 1".into()));
        }
        if self.sweep.k.iter().chain(&self.sweep.p).any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(HarnessError::Config("k and p axes need finite values ≥ 0".into()));
        }
        Ok(Experiment { config: self.clone(), eq, kernel, regime })
    }
}

fn invalid(e: fraclim_core::Error) -> HarnessError {
    HarnessError::Config(e.to_string())
}

/// A validated configuration with its numerical objects.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub eq: Arc<HeavyTailEquilibrium>,
    pub kernel: CollisionKernel,
    pub regime: ScalingRegime,
}

impl Experiment {
    /// Limit coefficient: `κ` (fractional, critical) or the isotropic `D`
    /// of the cell problem (classical), with the configured override.
    pub fn kappa(&self) -> fraclim_core::Result<KappaValue> {
        let mut kv = match self.regime.kind() {
            RegimeKind::Classical => {
                let d = self.operator()?.solve_cell_problem()?.d[0][0];
                KappaValue::classical(d)
            }
            _ => {
                let mut kv = kappa_for(&self.kernel, &self.regime)?;
                if self.config.regime.kappa_method == KappaChoice::Quadrature {
                    if let Some(q) = kv.quadrature {
                        kv.kappa = q;
                        kv.method = KappaMethod::Quadrature;
                    }
                }
                kv
            }
        };
        if let Some(k) = self.config.regime.kappa {
            kv.kappa = k;
        }
        Ok(kv)
    }

    pub fn grid(&self) -> fraclim_core::Result<VelocityGrid> {
        match self.config.solver.grid {
            Some(g) => VelocityGrid::new(
                &self.eq,
                GridSpec {
                    r_outer: g.r_outer,
                    radial_panels: g.radial_panels,
                    nodes_per_panel: g.nodes_per_panel,
                    angular_nodes: g.angular_nodes,
                },
            ),
            None => VelocityGrid::default_for(&self.eq),
        }
    }

    pub fn operator(&self) -> fraclim_core::Result<DiscreteOperator> {
        DiscreteOperator::new(&self.kernel, self.grid()?)
    }

    pub fn initial_density(&self) -> fraclim_core::Result<DensityField> {
        let s = &self.config.solver;
        let modes = ModeSet::periodic(self.eq.dim(), s.box_len, s.modes)?;
        match s.initial {
            InitialData::Gaussian => DensityField::gaussian(&modes, s.width),
            InitialData::PointMass => Ok(DensityField::point_mass(&modes)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_validate_and_classify() {
        let exp = ExperimentConfig::default().validate().unwrap();
        assert_eq!(exp.regime.kind(), RegimeKind::Fractional);
        // uniform core and |v|^{-2} tail carry mass 2 each: κ₀/Z = 1/4, κ = π/4
        assert!((exp.kappa().unwrap().kappa - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn violated_hypothesis_is_named() {
        let mut cfg = ExperimentConfig::default();
        cfg.kernel = KernelConfig { kind: "separable".into(), beta: 1.2, nu0: None };
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("β"), "{err}");
        let err = ExperimentConfig::from_toml("[kernel]\nkind = \"bgk\"\nbeta = 0.3\n").unwrap().validate().unwrap_err();
        assert!(err.to_string().contains("β = 0"));
        assert!(ExperimentConfig::from_toml("[kernel]\nflavour = 1\n").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.mc.seed = 2;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![-1e6..1e6f64, 1e-12..1e-3f64]
    }

    prop_compose! {
        fn configs()(
            alpha in finite(), beta in finite(), dim in 1usize..4, nu0 in proptest::option::of(finite()),
            kappa in proptest::option::of(finite()), modes in 1usize..1000, dt in proptest::option::of(finite()),
            seed in any::<u64>(), eps in proptest::collection::vec(finite(), 0..5),
            k in proptest::collection::vec(finite(), 0..5), op in 0usize..4, gaussian in any::<bool>(),
        ) -> ExperimentConfig {
            let mut c = ExperimentConfig::default();
            c.equilibrium.alpha = alpha;
            c.equilibrium.dim = dim;
            c.equilibrium.profile = if gaussian { Profile::Gaussian } else { Profile::PowerTail };
            c.kernel.beta = beta;
            c.kernel.nu0 = nu0;
            c.regime.kappa = kappa;
            c.solver.modes = modes;
            c.solver.dt = dt;
            c.solver.grid = dt.map(|r| GridConfig { r_outer: r, radial_panels: 3, nodes_per_panel: 4, angular_nodes: 5 });
            c.mc.seed = seed;
            c.sweep.eps = eps;
            c.sweep.k = k;
            c.sweep.operation = [Operation::Symbol, Operation::Kappa, Operation::Solve, Operation::Mc][op];
            c
        }
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(c in configs()) {
            let text = c.to_toml();
            let back = ExperimentConfig::from_toml(&text).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(back.to_toml(), text);
        }
    }
}
