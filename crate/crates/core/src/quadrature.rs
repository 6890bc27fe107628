//! Gauss-Legendre rules and adaptive Gauss-Kronrod integration.
//!
//! The adaptive driver follows the QUADPACK `qag` strategy: an interval
//! list seeded with caller-supplied breakpoints, a 21-point Kronrod rule with
//! its embedded 10-point Gauss rule for the local error, and bisection of the
//! worst interval until the global tolerance is met.

use crate::error::bail;
#[allow(unused_imports)]
use crate::math::Float;
use crate::Result;
use alloc::vec::Vec;
use core::f64::consts::PI;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ...
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Integration tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            max_intervals: 4000,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-14, 1e-10)
    }
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// One 21-point Gauss-Kronrod panel. Returns (value, error estimate).
pub fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[10];
    let mut gauss = 0.0;
    let mut resabs = kron.abs();
    let mut fv = [0.0f64; 21];
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        kron += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kron;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    let value = kron * h;
    let resabs = resabs * h.abs();
    let resasc = resasc * h.abs();
    let mut err = ((kron - gauss) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        let scale = libm::pow(200.0 * err / resasc, 1.5);
        err = resasc * scale.min(1.0);
    }
    let round = 50.0 * f64::EPSILON * resabs;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && round > err {
        err = round;
    }
    (value, err)
}

/// Adaptive integration over `[points[0], points[last]]` with the interior
/// points used as initial panel boundaries.
pub fn integrate<F: Fn(f64) -> f64>(f: F, points: &[f64], tol: Tolerance) -> Result<Estimate> {
    if points.len() < 2 {
        bail!(InvalidInput, "need at least two breakpoints");
    }
    let mut segs: Vec<Segment> = Vec::with_capacity(points.len() + 64);
    for w in points.windows(2) {
        if !(w[1] >= w[0]) || !w[0].is_finite() || !w[1].is_finite() {
            bail!(InvalidInput, "breakpoints must be finite and increasing: {:?}", points);
        }
        if w[1] > w[0] {
            let (value, error) = gk21(&f, w[0], w[1]);
            segs.push(Segment { a: w[0], b: w[1], value, error });
        }
    }
    if segs.is_empty() {
        return Ok(Estimate { value: 0.0, error: 0.0, intervals: 0 });
    }
    loop {
        let total: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.error).sum();
        if !total.is_finite() {
            bail!(NumericalFailure, "non-finite integrand on [{}, {}]", points[0], points[points.len() - 1]);
        }
        if err <= tol.abs.max(tol.rel * total.abs()) {
            return Ok(Estimate { value: total, error: err, intervals: segs.len() });
        }
        if segs.len() >= tol.max_intervals {
            bail!(
                NumericalFailure,
                "adaptive quadrature on [{}, {}] stopped at {} intervals with error {err:e} (value {total:e})",
                points[0],
                points[points.len() - 1],
                segs.len()
            );
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
        let s = segs[worst];
        let m = 0.5 * (s.a + s.b);
        if !(m > s.a && m < s.b) {
            // Interval has collapsed to machine resolution; accept it as is.
            segs[worst].error = 0.0;
            continue;
        }
        let (v1, e1) = gk21(&f, s.a, m);
        let (v2, e2) = gk21(&f, m, s.b);
        segs[worst] = Segment { a: s.a, b: m, value: v1, error: e1 };
        segs.push(Segment { a: m, b: s.b, value: v2, error: e2 });
    }
}

/// Adaptive integration over `[a, ∞)` through `x = a + t/(1-t)`.
/// `points` are optional interior breakpoints in the original variable.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    points: &[f64],
    tol: Tolerance,
) -> Result<Estimate> {
    let mut ts: Vec<f64> = Vec::with_capacity(points.len() + 2);
    ts.push(0.0);
    for &x in points {
        if x > a && x.is_finite() {
            ts.push((x - a) / (1.0 + x - a));
        }
    }
    ts.push(1.0);
    ts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ts.dedup();
    integrate(
        |t| {
            let om = 1.0 - t;
            if om <= 0.0 {
                return 0.0;
            }
            let x = a + t / om;
            let v = f(x) / (om * om);
            if v.is_finite() { v } else { 0.0 }
        },
        &ts,
        tol,
    )
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Composite Gauss-Legendre rule on the panels delimited by `edges`.
pub fn composite_rule(edges: &[f64], nodes_per_panel: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(nodes_per_panel);
    let mut x = Vec::with_capacity(edges.len() * nodes_per_panel);
    let mut w = Vec::with_capacity(edges.len() * nodes_per_panel);
    for e in edges.windows(2) {
        let c = 0.5 * (e[0] + e[1]);
        let h = 0.5 * (e[1] - e[0]);
        for (xi, wi) in gx.iter().zip(&gw) {
            x.push(c + h * xi);
            w.push(h * wi);
        }
    }
    (x, w)
}

/// Result of [`half_line`]: the value of `∫_0^∞ h(s) ds` together with
/// divergence flags for the two ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfLine {
    pub value: f64,
    pub diverges_at_zero: bool,
    pub diverges_at_infinity: bool,
}

impl HalfLine {
    pub fn converged(&self) -> bool {
        !self.diverges_at_zero && !self.diverges_at_infinity
    }
}

const END_DECADES: usize = 8;
/// Decade-to-decade growth above which an end counts as divergent
/// (a power `s^e` in `ds/s` measure gives the ratio `10^e`).
const DIVERGENT_RATIO: f64 = 0.97;

/// `∫_0^∞ h(s) ds` for a nonnegative `h` with power-like behaviour at both
/// ends, integrated in `ln s`.
///
/// The range `[lo, hi]` is integrated directly; beyond it the integral is
/// accumulated decade by decade. If the last two decade contributions do
/// not shrink by at least 3%, that end is reported divergent;
/// otherwise the remainder is extrapolated geometrically. `kinks` are
/// interior breakpoints (points where `h` is not smooth).
pub fn half_line<F: Fn(f64) -> f64>(h: F, lo: f64, hi: f64, kinks: &[f64], tol: Tolerance) -> Result<HalfLine> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        bail!(InvalidInput, "half-line core range [{lo}, {hi}] invalid");
    }
    let g = |t: f64| {
        let s = libm::exp(t);
        let v = h(s) * s;
        if v.is_finite() { v } else { 0.0 }
    };
    let segment = |a: f64, b: f64| -> Result<f64> {
        let mut pts: Vec<f64> = Vec::with_capacity(kinks.len() + 2);
        pts.push(libm::log(a));
        for &k in kinks {
            if k > a && k < b {
                pts.push(libm::log(k));
            }
        }
        pts.push(libm::log(b));
        pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        Ok(integrate(&g, &pts, tol)?.value)
    };
    let middle = segment(lo, hi)?;
    let ten = 10.0f64;
    let mut below = [0.0; END_DECADES];
    let mut above = [0.0; END_DECADES];
    for j in 0..END_DECADES {
        let p = ten.powi(j as i32);
        below[j] = segment(lo / (p * ten), lo / p)?;
        above[j] = segment(hi * p, hi * p * ten)?;
    }
    let close = |parts: &[f64; END_DECADES]| -> (f64, bool) {
        let sum: f64 = parts.iter().sum();
        let (last, prev) = (parts[END_DECADES - 1], parts[END_DECADES - 2]);
        if last == 0.0 {
            return (sum, false);
        }
        let ratio = last / prev;
        if !(ratio < DIVERGENT_RATIO) || prev <= 0.0 {
            return (sum, true);
        }
        (sum + last * ratio / (1.0 - ratio), false)
    };
    let (b, dz) = close(&below);
    let (a, di) = close(&above);
    Ok(HalfLine { value: middle + b + a, diverges_at_zero: dz, diverges_at_infinity: di })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 16, 64] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13, "n={n}");
            let deg = 2 * n - 1;
            let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * libm::pow(*x, (deg - 1) as f64)).sum();
            let exact = 2.0 / deg as f64;
            assert!((approx - exact).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let e = integrate(|x| 1.0 / libm::sqrt(x), &[0.0, 1.0], Tolerance::default()).unwrap();
        assert!((e.value - 2.0).abs() < 1e-8, "{e:?}");
    }

    #[test]
    fn semi_infinite_power_tail() {
        // ∫_1^∞ x^{-2} dx = 1 and ∫_0^∞ dx/(1+x^2) = π/2
        let e = integrate_to_infinity(|x| 1.0 / (x * x), 1.0, &[], Tolerance::default()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-9);
        let e = integrate_to_infinity(|x| 1.0 / (1.0 + x * x), 0.0, &[1.0], Tolerance::default()).unwrap();
        assert!((e.value - PI / 2.0).abs() < 1e-9);
    }

    #[test]
    fn reversed_breakpoints_rejected() {
        assert!(integrate(|x| x, &[1.0, 0.0], Tolerance::default()).is_err());
    }
    #[test]
    fn half_line_power_ends() {
        // ∫_0^∞ s^{-1/2}/(1+s) ds = π
        let r = half_line(|s| 1.0 / (libm::sqrt(s) * (1.0 + s)), 1e-3, 1e3, &[1.0], Tolerance::default()).unwrap();
        assert!(r.converged());
        assert!((r.value - PI).abs() < 1e-7, "{r:?}");
        let r = half_line(|s| 1.0 / (s * libm::sqrt(s) + s), 1e-3, 1e3, &[], Tolerance::default()).unwrap();
        assert!(r.diverges_at_zero && !r.diverges_at_infinity);
        let r = half_line(|s| 1.0 / (1.0 + s), 1e-3, 1e3, &[], Tolerance::default()).unwrap();
        assert!(r.diverges_at_infinity && !r.diverges_at_zero);
    }
}
