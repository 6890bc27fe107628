use super::*;
use crate::collision::{DiscreteOperator, GridSpec, VelocityGrid};
use crate::equilibria::{EquilibriumSpec, SlowVaryingFn};
use crate::scaling::classify;
use crate::solvers::{solve_kinetic, DensityField, ModeSet, PhaseSpaceField};
use alloc::sync::Arc;
use alloc::vec;

fn power_eq(alpha: f64) -> Arc<HeavyTailEquilibrium> {
    Arc::new(HeavyTailEquilibrium::new(EquilibriumSpec::power_tail(1, alpha, 1.0)).unwrap())
}

fn regime(alpha: f64, beta: f64) -> ScalingRegime {
    classify(alpha, beta, &SlowVaryingFn::one()).unwrap()
}

#[test]
fn free_streaming_is_exact() {
    let kernel = CollisionKernel::bgk(power_eq(1.0));
    let reg = regime(1.0, 0.0);
    let mut params = JumpProcessParams::new(0.1, 2.0, 500, 3).with_snapshots(&[0.5, 1.0]);
    params.free_streaming = true;
    let sim = simulate(&kernel, &reg, &params).unwrap();
    assert_eq!(sim.jumps, 0);
    assert_eq!(sim.snapshots.len(), 3);
    let speed = 0.1 / reg.theta(0.1).unwrap();
    for snap in &sim.snapshots {
        assert_eq!(snap.len(), 500);
        for (x, v) in snap.positions.iter().zip(&snap.velocities) {
            assert_eq!(x[0], speed * v[0] * snap.time);
        }
    }
}

#[test]
fn ensembles_are_reproducible_per_particle() {
    let kernel = CollisionKernel::bgk(power_eq(1.0));
    let reg = regime(1.0, 0.0);
    let a = simulate(&kernel, &reg, &JumpProcessParams::new(0.1, 1.0, 300, 9)).unwrap();
    let b = simulate(&kernel, &reg, &JumpProcessParams::new(0.1, 1.0, 1000, 9)).unwrap();
    assert_eq!(a.last().positions[..], b.last().positions[..300]);
    let c = simulate(&kernel, &reg, &JumpProcessParams::new(0.1, 1.0, 300, 10)).unwrap();
    assert_ne!(a.last().positions, c.last().positions);
}

#[test]
fn characteristic_function_trivia() {
    let e = ParticleEnsemble { dim: 1, time: 0.0, positions: vec![[0.0; 3]; 1000], velocities: vec![[1.0, 0.0, 0.0]; 1000] };
    let cf = empirical_cf(&e, &[[0.5, 0.0, 0.0], [3.0, 0.0, 0.0]]).unwrap();
    assert!(cf.iter().all(|c| c.value == Complex64::new(1.0, 0.0) && c.se_abs == 0.0));
    let kernel = CollisionKernel::bgk(power_eq(1.0));
    let sim = simulate(&kernel, &regime(1.0, 0.0), &JumpProcessParams::new(0.1, 1.0, 2000, 1)).unwrap();
    let cf = empirical_cf(sim.last(), &[[0.7, 0.0, 0.0], [-0.7, 0.0, 0.0]]).unwrap();
    assert_eq!(cf[0].value, cf[1].value.conj());
    let small = ParticleEnsemble { dim: 1, time: 0.0, positions: vec![[0.0; 3]; 10], velocities: vec![[0.0; 3]; 10] };
    assert!(matches!(empirical_cf(&small, &[[1.0, 0.0, 0.0]]), Err(crate::Error::Statistics(_))));
}

#[test]
fn classical_mean_square_displacement() {
    let eq = Arc::new(HeavyTailEquilibrium::maxwellian(1).unwrap());
    let kernel = CollisionKernel::bgk(eq.clone());
    let op = DiscreteOperator::new(&kernel, VelocityGrid::default_for(&eq).unwrap()).unwrap();
    let d = op.solve_cell_problem().unwrap().d[0][0];
    let reg = classify(f64::INFINITY, 0.0, &SlowVaryingFn::one()).unwrap();
    let horizon = 1.0;
    let sim = simulate(&kernel, &reg, &JumpProcessParams::new(0.03, horizon, 100_000, 17)).unwrap();
    let (msd, se) = sim.last().mean_square_displacement();
    assert!((msd / horizon - 2.0 * d).abs() <= 3.0 * se / horizon, "MSD/T = {} vs 2D = {}", msd / horizon, 2.0 * d);
}

#[test]
fn velocities_stay_distributed_as_equilibrium() {
    let eq = power_eq(1.2);
    let cases = [
        CollisionKernel::bgk(eq.clone()),
        CollisionKernel::new(eq.clone(), KernelKind::Separable, 0.4).unwrap(),
        CollisionKernel::new(eq.clone(), KernelKind::Shifted, 0.5).unwrap(),
        CollisionKernel::new(eq.clone(), KernelKind::Shifted, -0.4).unwrap(),
        CollisionKernel::new(eq.clone(), KernelKind::Physical, -0.3).unwrap(),
        CollisionKernel::new(eq.clone(), KernelKind::Physical, 0.3).unwrap(),
    ];
    for kernel in &cases {
        let reg = regime(1.2, kernel.beta());
        let sim = simulate(kernel, &reg, &JumpProcessParams::new(0.1, 1.0, 100_000, 23)).unwrap();
        assert!(sim.jumps > 100_000);
        let ks = velocity_ks(sim.last(), &eq).unwrap();
        assert!(ks < 0.01, "{} β = {}: KS {ks}", kernel.kind().name(), kernel.beta());
        assert!(sim.acceptance() >= MIN_ACCEPTANCE);
    }
}

/// The jump process and the per-mode kinetic solver describe the same law.
#[test]
fn particles_match_the_kinetic_solver() {
    let eq = power_eq(1.0);
    for kernel in [CollisionKernel::bgk(eq.clone()), CollisionKernel::new(eq.clone(), KernelKind::Separable, 0.4).unwrap()] {
        let reg = regime(1.0, kernel.beta());
        let eps = 0.1;
        let horizon = 1.0;
        let ks = [[0.5, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]];
        // ν grows like ⟨v⟩^β: the grid reaches far out and the step stays
        // well below the fastest collision time
        let spec = GridSpec { r_outer: 1e8, radial_panels: 40, nodes_per_panel: 24, angular_nodes: 1 };
        let op = DiscreteOperator::new(&kernel, VelocityGrid::new(&eq, spec).unwrap()).unwrap();
        let modes = ModeSet::from_modes(1, 1.0, ks.to_vec()).unwrap();
        let f0 = PhaseSpaceField::well_prepared(&op, &DensityField::point_mass(&modes), eps, reg.clone()).unwrap();
        let theta = reg.theta(eps).unwrap();
        let tr = solve_kinetic(&op, &f0, horizon, theta / 8000.0, &[horizon]).unwrap();
        let sim = simulate(&kernel, &reg, &JumpProcessParams::new(eps, horizon, 200_000, 31)).unwrap();
        let cf = empirical_cf(sim.last(), &ks).unwrap();
        for (c, det) in cf.iter().zip(&tr.densities[0].amplitudes) {
            let z = (c.value.re - det.re) / c.se_re;
            assert!(z.abs() < 4.0, "{} k {:?}: MC {} vs solver {} (z = {z})", kernel.kind().name(), c.k, c.value, det);
        }
    }
}

#[test]
fn displacement_quantiles_scale() {
    let times = [0.25, 0.5, 1.0, 2.0];
    let kernel = CollisionKernel::bgk(power_eq(1.0));
    let sim = simulate(&kernel, &regime(1.0, 0.0), &JumpProcessParams::new(0.02, 2.0, 50_000, 5).with_snapshots(&times)).unwrap();
    let rep = displacement_scaling(&sim.snapshots, 0.5).unwrap();
    assert!(rep.matches(1.0, 0.05), "{rep:?}");
    let (med, se) = median_first_coordinate(sim.last()).unwrap();
    assert!(med.abs() < 3.0 * se, "{med} ± {se}");

    let eq = Arc::new(HeavyTailEquilibrium::maxwellian(1).unwrap());
    let reg = classify(f64::INFINITY, 0.0, &SlowVaryingFn::one()).unwrap();
    let sim = simulate(&CollisionKernel::bgk(eq), &reg, &JumpProcessParams::new(0.05, 2.0, 50_000, 6).with_snapshots(&times))
        .unwrap();
    let rep = displacement_scaling(&sim.snapshots, 0.5).unwrap();
    assert!(rep.matches(0.5, 0.05), "{rep:?}");
    assert!(displacement_scaling(&sim.snapshots[..3], 0.5).is_err());
}

#[test]
fn singular_kernels_outside_integrability_are_unsamplable() {
    let eq = power_eq(1.5);
    let kernel = CollisionKernel::new_unchecked(eq, KernelKind::Physical, -1.2).unwrap();
    let reg = regime(1.5, 0.0);
    let res = simulate(&kernel, &reg, &JumpProcessParams::new(0.1, 1.0, 100, 1));
    assert!(matches!(res, Err(crate::Error::Unsamplable(_))), "{res:?}");
}
