use super::*;
use crate::collision::KernelKind;
use crate::equilibria::{EquilibriumSpec, HeavyTailEquilibrium, SlowVaryingFn};
use crate::scaling::classify;
use alloc::sync::Arc;
use alloc::vec;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn power_eq(dim: usize, alpha: f64) -> Arc<HeavyTailEquilibrium> {
    Arc::new(HeavyTailEquilibrium::new(EquilibriumSpec::power_tail(dim, alpha, 1.0)).unwrap())
}

fn bgk(dim: usize, alpha: f64) -> (CollisionKernel, ScalingRegime) {
    let k = CollisionKernel::bgk(power_eq(dim, alpha));
    let r = classify(alpha, 0.0, &SlowVaryingFn::one()).unwrap();
    (k, r)
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn angular_closed_forms_match_quadrature() {
    for dim in 1..=3 {
        for &b in &[0.1, 1.0, 3.0] {
            for &a in &[1e-6, 1e-3, 0.05, 0.7, 1.0, 20.0, 1e4] {
                let c = angular_quadratic(dim, b, a);
                let n = angular_quadratic_numeric(dim, b, a).unwrap();
                assert!(rel(c, n) < 1e-9, "dim {dim} b {b} a {a}: {c} vs {n}");
            }
        }
    }
    assert_eq!(angular_quadratic(3, 1.0, 0.0), 0.0);
}

#[test]
fn zero_wave_number_gives_pure_drift() {
    let (k, r) = bgk(1, 1.0);
    for &p in &[0.0, 0.5, 3.0] {
        for &eps in &[0.3, 1e-2] {
            let s = a_eps(&k, &r, p, &[0.0; 3], eps).unwrap();
            let theta = libm::pow(eps, 1.0);
            let exact = -p / (1.0 + theta * p);
            assert!((s.a_eps.re - exact).abs() <= 1e-9 * exact.abs().max(1e-12), "p {p}: {} vs {exact}", s.a_eps.re);
            assert_eq!(s.d_eps, 0.0);
        }
    }
    let s = a_eps(&k, &r, 0.0, &[0.0; 3], 0.1).unwrap();
    assert_eq!(s.c_remainder, 0.0);
}

#[test]
fn rejects_bad_inputs() {
    let (k, r) = bgk(1, 1.0);
    assert!(a_eps(&k, &r, -1.0, &[1.0, 0.0, 0.0], 0.1).is_err());
    assert!(a_eps(&k, &r, 1.0, &[1.0, 0.0, 0.0], 1.5).is_err());
    assert!(a_eps(&k, &r, 1.0, &[1.0, 1.0, 0.0], 0.1).is_err());
}

#[test]
fn kappa_fractional_one_dimensional_closed_forms() {
    for (alpha, exact) in [(1.0, PI), (0.5, PI * core::f64::consts::SQRT_2)] {
        let r = classify(alpha, 0.0, &SlowVaryingFn::one()).unwrap();
        let kv = kappa_fractional(&r, 1.0, 1.0, 1).unwrap();
        assert!((kv.kappa - exact).abs() < 1e-6, "α {alpha}: {}", kv.kappa);
        assert!(kv.relative_gap().unwrap() < 1e-6, "α {alpha}: {:?}", kv);
    }
}

#[test]
fn kappa_fractional_beta_zero_unit_frequency_is_the_direct_integral() {
    // κ = ∫ w₁²/(1 + w₁²) κ₀ |w|^{-N-α} dw, in 1-D by its own quadrature
    let alpha = 1.3;
    let r = classify(alpha, 0.0, &SlowVaryingFn::one()).unwrap();
    let kv = kappa_fractional(&r, 2.0, 1.0, 1).unwrap();
    let direct = 2.0
        * 2.0
        * integrate_to_infinity(|w| w * w / (1.0 + w * w) * libm::pow(w, -1.0 - alpha), 0.0, &[1.0], Tolerance::new(0.0, 1e-12))
            .unwrap()
            .value;
    assert!(rel(kv.kappa, direct) < 1e-7, "{} vs {direct}", kv.kappa);
}

#[test]
fn kappa_fractional_multidimensional_agreement() {
    for dim in 2..=3 {
        for &(alpha, beta, nu0) in &[(0.8, 0.0, 1.0), (1.5, 0.2, 1.7), (1.2, -0.5, 0.6)] {
            let r = classify(alpha, beta, &SlowVaryingFn::one()).unwrap();
            let kv = kappa_fractional(&r, 0.7, nu0, dim).unwrap();
            assert!(kv.relative_gap().unwrap() < 1e-4, "dim {dim} α {alpha}: {kv:?}");
            assert!(kv.kappa > 0.0);
        }
    }
}

#[test]
fn kappa_fractional_refuses_other_regimes() {
    let r = classify(1.5, 0.5, &SlowVaryingFn::one()).unwrap();
    assert!(matches!(kappa_fractional(&r, 1.0, 1.0, 1), Err(crate::Error::UnsupportedRegime(_))));
    assert!(matches!(kappa_critical(1.5, 0.2, 1.0, 1.0, 1), Err(crate::Error::UnsupportedRegime(_))));
}

#[test]
fn kappa_critical_closed_forms_and_sweep() {
    let alpha = 1.5;
    let beta = 0.5;
    let k1 = kappa_critical(alpha, beta, 1.0, 1.0, 1).unwrap();
    assert!(rel(k1.kappa, 2.0 / (alpha - 1.0)) < 1e-14);
    let k2 = kappa_critical(alpha, beta, 1.0, 1.0, 2).unwrap();
    assert!(rel(k2.kappa, PI / (alpha - 1.0)) < 1e-14);
    let k3 = kappa_critical(alpha, beta, 1.0, 1.0, 3).unwrap();
    assert!(rel(k3.kappa, 4.0 * PI / 3.0 / (alpha - 1.0)) < 1e-14);
    for kv in [k1, k2, k3] {
        assert!(kv.relative_gap().unwrap() < 0.02, "{kv:?}");
    }
    let k = kappa_critical(1.25, 0.75, 0.4, 2.5, 2).unwrap();
    assert!(k.relative_gap().unwrap() < 0.02, "{k:?}");
}

#[test]
fn critical_psi_one_dimensional_closed_form() {
    // in 1-D ψ(λ) = (κ₀/ν₀) ln(1 + ν₀²/λ²)
    for &(lambda, nu0) in &[(1e-3, 1.0), (0.5, 2.0), (1e-6, 0.3)] {
        let psi = critical_psi(lambda, 1.0, nu0, 1).unwrap();
        let exact = libm::log1p(nu0 * nu0 / (lambda * lambda)) / nu0;
        assert!(rel(psi, exact) < 1e-8, "λ {lambda}: {psi} vs {exact}");
    }
    let sweep = critical_sweep(&[1e-2, 1e-4, 1e-6], 0.5, 1.0, 1.0, 1).unwrap();
    assert!(sweep.windows(2).all(|w| (w[1] - 4.0).abs() <= (w[0] - 4.0).abs()));
}

#[test]
fn limit_symbol_examples() {
    let r = classify(1.0, 0.0, &SlowVaryingFn::one()).unwrap();
    let kv = kappa_fractional(&r, 1.0, 1.0, 1).unwrap();
    assert_eq!(limit_symbol(&kv, 0.0, &[0.0; 3]), 0.0);
    assert!((limit_symbol(&kv, 1.0, &[2.0, 0.0, 0.0]) + 1.0 + 2.0 * PI).abs() < 1e-6);
    let kv3 = KappaValue { gamma: 1.4, ..kv };
    let a = limit_symbol(&kv3, 0.3, &[1.0, 2.0, 2.0]);
    let b = limit_symbol(&kv3, 0.3, &[0.0, 3.0, 0.0]);
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn decomposition_and_evenness() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let eq = power_eq(1, 1.2);
    let kernels = [
        CollisionKernel::bgk(eq.clone()),
        CollisionKernel::new(eq.clone(), KernelKind::Separable, 0.4).unwrap(),
    ];
    for kernel in &kernels {
        let r = classify(1.2, kernel.beta(), &SlowVaryingFn::one()).unwrap();
        for _ in 0..50 {
            let p = 3.0 * unit(&mut rng);
            let kx = 4.0 * unit(&mut rng) - 2.0;
            let eps = libm::pow(10.0, -0.3 - 3.0 * unit(&mut rng));
            let s = a_eps(kernel, &r, p, &[kx, 0.0, 0.0], eps).unwrap();
            let total = s.a_eps.re - s.decomposed();
            assert!(total.abs() <= 1e-8 * s.a_eps.norm().max(1e-300), "{} {s:?}", kernel.kind().name());
            assert!(s.a_eps.im.abs() <= 1e-10 * s.a_eps.norm().max(1.0));
            assert!(s.drift <= p * (1.0 + 1e-12) && s.drift >= 0.0);
            assert!(s.d_eps >= 0.0);
        }
    }
}

#[test]
fn decomposition_in_two_and_three_dimensions() {
    for dim in 2..=3 {
        let (k, r) = bgk(dim, 1.0);
        let s = a_eps(&k, &r, 0.7, &[0.6, 0.8, 0.0], 1e-2).unwrap();
        assert!((s.a_eps.re - s.decomposed()).abs() <= 1e-8 * s.a_eps.norm(), "dim {dim}: {s:?}");
        assert!(s.a_eps.im.abs() <= 1e-10 * s.a_eps.norm());
    }
}

#[test]
fn symbol_converges_to_limit_bgk_one_dimensional() {
    let (k, r) = bgk(1, 1.0);
    let kv = kappa_for(&k, &r).unwrap();
    let target = limit_symbol(&kv, 1.0, &[1.0, 0.0, 0.0]);
    let mut last = f64::INFINITY;
    for &eps in &[1e-1, 1e-2, 1e-3, 1e-4] {
        let s = a_eps(&k, &r, 1.0, &[1.0, 0.0, 0.0], eps).unwrap();
        let err = (s.a_eps.re - target).abs();
        assert!(err < last, "ε {eps}: {err} after {last}");
        last = err;
    }
    assert!(last < 0.02 * target.abs(), "{last}");
}

#[test]
fn symbol_converges_in_two_dimensions() {
    let (k, r) = bgk(2, 1.4);
    let kv = kappa_for(&k, &r).unwrap();
    let kvec = [0.0, 1.5, 0.0];
    let target = limit_symbol(&kv, 0.5, &kvec);
    let mut last = f64::INFINITY;
    for &eps in &[1e-1, 1e-2, 1e-3] {
        let s = a_eps(&k, &r, 0.5, &kvec, eps).unwrap();
        let err = (s.a_eps.re - target).abs();
        assert!(err < last, "ε {eps}: {err}");
        last = err;
    }
    assert!(last < 0.05 * target.abs());
}

#[test]
fn quadratic_part_is_bounded_by_the_limit() {
    for &alpha in &[0.5, 1.0, 1.6] {
        let (k, r) = bgk(1, alpha);
        let kv = kappa_for(&k, &r).unwrap();
        for &kx in &[0.1, 1.0, 5.0] {
            for &eps in &[0.5, 1e-2, 1e-4] {
                for &p in &[0.0, 2.0] {
                    let s = a_eps(&k, &r, p, &[kx, 0.0, 0.0], eps).unwrap();
                    let bound = kv.kappa * libm::pow(kx, alpha);
                    assert!(s.d_eps <= bound * (1.0 + 1e-8), "α {alpha} k {kx} ε {eps}: {} > {bound}", s.d_eps);
                    assert!(s.a_eps.norm() <= p + bound + 1e-8);
                }
            }
        }
    }
}

#[test]
fn quadratic_part_is_homogeneous_in_the_limit() {
    let eq = power_eq(1, 1.3);
    let k = CollisionKernel::new(eq, KernelKind::Separable, 0.3).unwrap();
    let r = classify(1.3, 0.3, &SlowVaryingFn::one()).unwrap();
    let eps = 1e-6;
    let d1 = d_eps(&k, &r, 1.0, &[1.0, 0.0, 0.0], eps).unwrap();
    let d2 = d_eps(&k, &r, 1.0, &[2.0, 0.0, 0.0], eps).unwrap();
    let want = libm::pow(2.0, r.gamma());
    assert!((d2 / d1 - want).abs() < 0.01, "{} vs {want}", d2 / d1);
}

#[test]
fn drift_tends_to_p() {
    let (k, r) = bgk(1, 0.8);
    let s = a_eps(&k, &r, 2.0, &[1.0, 0.0, 0.0], 1e-5).unwrap();
    assert!((s.drift_signed() + 2.0).abs() < 1e-3, "{}", s.drift);
}

#[test]
fn remainder_decays_at_the_predicted_rate() {
    let (k, r) = bgk(1, 1.0);
    let eps = crate::math::geomspace(1e-2, 1e-5, 4);
    let rep = remainder_probe(&k, &r, 1.0, &[1.0, 0.0, 0.0], &eps).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert!(rep.slope >= 0.5 - 0.02);
    let zero = remainder_probe(&k, &r, 0.0, &[0.0; 3], &eps).unwrap();
    assert!(zero.c.iter().all(|c| *c == 0.0) && zero.pass);
}

#[test]
fn remainder_decays_in_the_critical_regime() {
    let eq = power_eq(1, 1.5);
    let k = CollisionKernel::new(eq, KernelKind::Separable, 0.5).unwrap();
    let r = classify(1.5, 0.5, &SlowVaryingFn::one()).unwrap();
    assert_eq!(r.kind(), RegimeKind::Critical);
    let eps = crate::math::geomspace(1e-2, 1e-5, 4);
    let rep = remainder_probe(&k, &r, 1.0, &[1.0, 0.0, 0.0], &eps).unwrap();
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn critical_quadratic_part_approaches_kappa() {
    let eq = power_eq(1, 1.5);
    let k = CollisionKernel::new(eq, KernelKind::Separable, 0.5).unwrap();
    let r = classify(1.5, 0.5, &SlowVaryingFn::one()).unwrap();
    let kv = kappa_for(&k, &r).unwrap();
    let errs: Vec<f64> = [1e-2, 1e-4, 1e-6]
        .iter()
        .map(|&e| (d_eps(&k, &r, 0.0, &[1.0, 0.0, 0.0], e).unwrap() / kv.kappa - 1.0).abs())
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    let _ = vec![0u8];
}

#[test]
fn angular_complement_adds_up() {
    for dim in 1..=3 {
        for &(b, a) in &[(1.0, 1e-4), (1.0, 0.5), (0.3, 2.0), (1.0, 1e5)] {
            let sum = angular_complement(dim, b, a) + angular_quadratic(dim, b, a);
            assert!(rel(sum, crate::math::sphere_area(dim)) < 1e-13, "dim {dim}");
        }
        let far = angular_complement(dim, 1.0, 1e8);
        assert!(far > 0.0 && far < 1e-6);
    }
}
