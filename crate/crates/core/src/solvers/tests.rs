use super::*;
use crate::collision::{CollisionKernel, GridSpec, KernelKind, VelocityGrid};
use crate::equilibria::{EquilibriumSpec, HeavyTailEquilibrium, SlowVaryingFn};
use crate::scaling::classify;
use alloc::sync::Arc;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn power_eq(dim: usize, alpha: f64) -> Arc<HeavyTailEquilibrium> {
    Arc::new(HeavyTailEquilibrium::new(EquilibriumSpec::power_tail(dim, alpha, 1.0)).unwrap())
}

fn bgk_op(alpha: f64) -> DiscreteOperator {
    let eq = power_eq(1, alpha);
    let kernel = CollisionKernel::bgk(eq.clone());
    DiscreteOperator::new(&kernel, VelocityGrid::default_for(&eq).unwrap()).unwrap()
}

fn small_op(kind: KernelKind, beta: f64) -> (DiscreteOperator, ScalingRegime) {
    let eq = power_eq(1, 1.2);
    let kernel = CollisionKernel::new(eq.clone(), kind, beta).unwrap();
    let grid = VelocityGrid::new(&eq, GridSpec { r_outer: 1e2, radial_panels: 8, nodes_per_panel: 6, angular_nodes: 1 }).unwrap();
    let regime = classify(1.2, beta, &SlowVaryingFn::one()).unwrap();
    (DiscreteOperator::new(&kernel, grid).unwrap(), regime)
}

fn regime(alpha: f64) -> ScalingRegime {
    classify(alpha, 0.0, &SlowVaryingFn::one()).unwrap()
}

#[test]
fn periodic_modes_and_partners() {
    let m = ModeSet::periodic(2, 2.0 * PI, 4).unwrap();
    assert_eq!(m.len(), 16);
    let z = m.zero_index().unwrap();
    assert_eq!(m.modes()[z], [0.0; 3]);
    let i = m.modes().iter().position(|k| *k == [1.0, -1.0, 0.0]).unwrap();
    assert_eq!(m.modes()[m.partner(i).unwrap()], [-1.0, 1.0, 0.0]);
    // the Nyquist row has no partner
    let j = m.modes().iter().position(|k| *k == [-2.0, 0.0, 0.0]).unwrap();
    assert!(m.partner(j).is_none());
    assert!(ModeSet::periodic(1, -1.0, 4).is_err());
}

#[test]
fn uniform_equilibrium_is_stationary() {
    for (op, reg) in [
        (bgk_op(1.0), regime(1.0)),
        small_op(KernelKind::Separable, 0.4),
        small_op(KernelKind::Physical, 0.3),
    ] {
        let modes = ModeSet::periodic(1, 10.0, 8).unwrap();
        let mut amps = vec![Complex64::new(0.0, 0.0); modes.len()];
        amps[modes.zero_index().unwrap()] = Complex64::new(2.5, 0.0);
        let rho0 = DensityField::new(modes, amps).unwrap();
        let f0 = PhaseSpaceField::well_prepared(&op, &rho0, 0.05, reg).unwrap();
        let tr = solve_kinetic(&op, &f0, 0.5, 0.01, &[0.25, 0.5]).unwrap();
        for (a, b) in tr.final_field.values.iter().flatten().zip(f0.values.iter().flatten()) {
            assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()), "{a} vs {b}");
        }
    }
}

#[test]
fn mass_norm_and_reality_along_a_trajectory() {
    for (op, reg) in [(bgk_op(1.0), regime(1.0)), small_op(KernelKind::Physical, 0.3), small_op(KernelKind::Shifted, 0.5)] {
        let modes = ModeSet::periodic(1, 20.0, 32).unwrap();
        let rho0 = DensityField::gaussian(&modes, 0.5).unwrap();
        let f0 = PhaseSpaceField::well_prepared(&op, &rho0, 0.1, reg).unwrap();
        let tr = solve_kinetic(&op, &f0, 1.0, 1.0 / 200.0, &[1.0]).unwrap();
        assert!(tr.mass_drift() < 1e-8, "{}", tr.mass_drift());
        assert!((tr.mass_history[0] - 1.0).abs() < 1e-12);
        for w in tr.norm_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        assert!(tr.final_field.reality_defect() < 1e-12);
        assert!(tr.norm_history[tr.steps] < tr.norm_history[0]);
    }
}

#[test]
fn decomposition_identities() {
    let op = bgk_op(1.0);
    let modes = ModeSet::periodic(1, 20.0, 16).unwrap();
    let rho0 = DensityField::gaussian(&modes, 1.0).unwrap();
    let f0 = PhaseSpaceField::well_prepared(&op, &rho0, 0.1, regime(1.0)).unwrap();
    let (rho, g) = decompose(&f0, &op);
    assert!(rho.relative_l2(&rho0).unwrap() < 1e-13);
    assert!(fluctuation_norm_sq(&op, &modes, &g) < 1e-26);
    let tr = solve_kinetic(&op, &f0, 0.3, 0.01, &[]).unwrap();
    let (_, g) = decompose(&tr.final_field, &op);
    assert!(fluctuation_norm_sq(&op, &modes, &g) > 0.0);
    for row in &g {
        let m: Complex64 = row.iter().zip(op.grid().weights()).map(|(x, w)| x * w).sum();
        assert!(m.norm() < 1e-10);
    }
}

#[test]
fn fluctuations_decay_at_the_spectral_gap_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (op, reg) in [(bgk_op(1.0), regime(1.0)), small_op(KernelKind::Physical, 0.3)] {
        let m = op.b3_bound();
        let modes = ModeSet::from_modes(1, 1.0, vec![[0.0; 3]]).unwrap();
        let row: Vec<Complex64> = op
            .equilibrium()
            .iter()
            .map(|f| Complex64::new(f * (0.5 + (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64), 0.0))
            .collect();
        let eps = 0.1;
        let theta = reg.theta(eps).unwrap();
        let f0 = PhaseSpaceField::new(modes.clone(), vec![row], eps, reg).unwrap();
        let horizon = 2.0 * theta;
        let tr = solve_kinetic(&op, &f0, horizon, theta / 400.0, &[]).unwrap();
        let (_, g0) = decompose(&f0, &op);
        let (_, g1) = decompose(&tr.final_field, &op);
        let rate = -0.5 * libm::log(fluctuation_norm_sq(&op, &modes, &g1) / fluctuation_norm_sq(&op, &modes, &g0)) / horizon;
        let floor = 1.0 / (2.0 * m) / theta;
        assert!(rate >= floor * (1.0 - 1e-3), "rate {rate} below {floor}");
    }
}

#[test]
fn splitting_is_first_order() {
    let op = bgk_op(1.0);
    let reg = regime(1.0);
    let modes = ModeSet::from_modes(1, 1.0, vec![[1.0, 0.0, 0.0]]).unwrap();
    let rho0 = DensityField::point_mass(&modes);
    let f0 = PhaseSpaceField::well_prepared(&op, &rho0, 0.1, reg).unwrap();
    let horizon = 0.5;
    let rho_at = |n: usize| solve_kinetic(&op, &f0, horizon, horizon / n as f64, &[horizon]).unwrap().densities[0].amplitudes[0];
    let reference = rho_at(8192) * 2.0 - rho_at(4096);
    let ns = [256usize, 512, 1024];
    let dts: Vec<f64> = ns.iter().map(|n| horizon / *n as f64).collect();
    let errs: Vec<f64> = ns.iter().map(|n| (rho_at(*n) - reference).norm()).collect();
    let slope = crate::math::loglog_slope(&dts, &errs);
    assert!((slope - 1.0).abs() <= 0.1, "slope {slope}, errors {errs:?}");
}

#[test]
fn kinetic_density_approaches_the_fractional_limit() {
    let op = bgk_op(1.0);
    let reg = regime(1.0);
    let kernel = CollisionKernel::bgk(power_eq(1, 1.0));
    let kappa = crate::symbol::kappa_for(&kernel, &reg).unwrap().kappa;
    let modes = ModeSet::periodic(1, 40.0, 64).unwrap();
    let rho0 = DensityField::gaussian(&modes, 0.5).unwrap();
    let limit = solve_fractional_heat(kappa, 1.0, &rho0, 1.0).unwrap();
    let errs: Vec<f64> = [0.08, 0.04]
        .iter()
        .map(|&eps| {
            let tr = kinetic_density(&op, &reg, &rho0, eps, 1.0, 1.0 / 1024.0).unwrap();
            tr.densities[0].relative_l2(&limit).unwrap()
        })
        .collect();
    assert!(errs[1] < errs[0], "{errs:?}");
}

#[test]
fn heat_multipliers() {
    let modes = ModeSet::periodic(2, 2.0 * PI, 8).unwrap();
    let rho0 = DensityField::gaussian(&modes, 0.3).unwrap();
    let frac = solve_fractional_heat(1.0, 2.0, &rho0, 0.7).unwrap();
    let eye = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let heat = solve_classical_heat(&eye, &rho0, 0.7).unwrap();
    assert!(frac.relative_l2(&heat).unwrap() < 1e-14);
    assert!((frac.mass() - 1.0).abs() < 1e-15 && (heat.mass() - 1.0).abs() < 1e-15);
    let aniso = [[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 0.0]];
    let h = solve_classical_heat(&aniso, &rho0, 0.5).unwrap();
    let i = modes.modes().iter().position(|k| *k == [0.0, 1.0, 0.0]).unwrap();
    assert!((h.amplitudes[i] / rho0.amplitudes[i] - libm::exp(-1.0)).norm() < 1e-15);
    let skew = [[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]];
    assert!(matches!(solve_classical_heat(&skew, &rho0, 1.0), Err(crate::Error::InvalidInput(_))));
    let indefinite = [[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 0.0]];
    assert!(solve_classical_heat(&indefinite, &rho0, 1.0).is_err());
    assert!(solve_fractional_heat(1.0, 2.5, &rho0, 1.0).is_err());
}

#[test]
fn fractional_point_mass_inverts_to_cauchy() {
    let l = 200.0;
    let modes = ModeSet::periodic(1, l, 4096).unwrap();
    let kt = 1.3;
    let rho = solve_fractional_heat(kt, 1.0, &DensityField::point_mass(&modes), 1.0).unwrap();
    // the periodic sum of Cauchy kernels, truncated to nearby images
    for &x in &[0.0, 0.7, 3.0] {
        let got = rho.eval(&[[x, 0.0, 0.0]])[0];
        let want: f64 = (-2000..=2000)
            .map(|j| {
                let y = x + j as f64 * l;
                kt / (PI * (kt * kt + y * y))
            })
            .sum();
        assert!((got - want).abs() < 1e-6, "x {x}: {got} vs {want}");
    }
}

#[test]
fn stable_profile_closed_forms() {
    let xs: Vec<f64> = (-40..=40).map(|j| j as f64 * 0.25).collect();
    let (kappa, t) = (0.8, 1.5);
    let gauss = stable_profile(kappa, 2.0, t, &xs).unwrap();
    let var = 2.0 * kappa * t;
    for (x, p) in xs.iter().zip(&gauss) {
        let want = libm::exp(-x * x / (2.0 * var)) / libm::sqrt(2.0 * PI * var);
        assert!((p - want).abs() <= 1e-6, "x {x}");
    }
    let cauchy = stable_profile(kappa, 1.0, t, &xs).unwrap();
    let c = kappa * t;
    for (x, p) in xs.iter().zip(&cauchy) {
        let want = c / (PI * (c * c + x * x));
        assert!((p - want).abs() <= 1e-6, "x {x}");
    }
    assert!(stable_profile(1.0, 0.0, 1.0, &xs).is_err());
    assert!(stable_profile(1.0, 1.0, 0.0, &xs).is_err());
}

#[test]
fn stable_profile_has_power_tails() {
    let gamma = 1.5;
    let (kappa, t) = (1.0, 1.0);
    let xs: Vec<f64> = crate::math::geomspace(10.0, 100.0, 5);
    let p = stable_profile(kappa, gamma, t, &xs).unwrap();
    let c = kappa * t * crate::math::gamma(1.0 + gamma) * libm::sin(0.5 * PI * gamma) / PI;
    let scaled: Vec<f64> = xs.iter().zip(&p).map(|(x, p)| p * libm::pow(*x, 1.0 + gamma)).collect();
    assert!(scaled.iter().all(|s| *s > 0.0));
    let last = scaled[scaled.len() - 1];
    assert!((last / c - 1.0).abs() < 0.02, "{scaled:?} vs {c}");
    assert!((scaled[0] / c - 1.0).abs() > (last / c - 1.0).abs());
}

#[test]
fn rejects_bad_kinetic_inputs() {
    let op = bgk_op(1.0);
    let modes = ModeSet::periodic(1, 10.0, 4).unwrap();
    let rho0 = DensityField::gaussian(&modes, 1.0).unwrap();
    let f0 = PhaseSpaceField::well_prepared(&op, &rho0, 0.1, regime(1.0)).unwrap();
    assert!(solve_kinetic(&op, &f0, -1.0, 0.1, &[]).is_err());
    assert!(solve_kinetic(&op, &f0, 1.0, 2.0, &[]).is_err());
    assert!(solve_kinetic(&op, &f0, 1.0, 0.1, &[3.0]).is_err());
    assert!(PhaseSpaceField::well_prepared(&op, &rho0, 1.5, regime(1.0)).is_err());
}
