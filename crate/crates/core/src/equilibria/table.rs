//! Tabulated CDFs with cubic Hermite interpolation, used for inverse-CDF
//! sampling where the radial law has no closed-form inverse.

use crate::quadrature::gauss_legendre;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CdfTable {
    xs: Vec<f64>,
    cdf: Vec<f64>,
    pdf: Vec<f64>,
}

impl CdfTable {
    /// Tabulates the normalized CDF of `density` restricted to `[xs[0], xs[last]]`.
    pub(crate) fn build<F: Fn(f64) -> f64>(density: F, xs: Vec<f64>) -> Self {
        let (gx, gw) = gauss_legendre(16);
        let mut cdf = Vec::with_capacity(xs.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in xs.windows(2) {
            let c = 0.5 * (w[0] + w[1]);
            let h = 0.5 * (w[1] - w[0]);
            let piece: f64 = gx.iter().zip(&gw).map(|(x, wt)| wt * density(c + h * x)).sum();
            acc += piece * h;
            cdf.push(acc);
        }
        let total = acc;
        for c in cdf.iter_mut() {
            *c /= total;
        }
        let pdf = xs.iter().map(|x| density(*x) / total).collect();
        Self { xs, cdf, pdf }
    }

    /// Inverse of the tabulated CDF at `u ∈ [0, 1]`.
    pub(crate) fn invert(&self, u: f64) -> f64 {
        let n = self.xs.len();
        let i = self.cdf.partition_point(|c| *c <= u).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (c0, c1) = (self.cdf[i], self.cdf[i + 1]);
        let h = x1 - x0;
        let (m0, m1) = (self.pdf[i] * h, self.pdf[i + 1] * h);
        let hermite = |t: f64| {
            let t2 = t * t;
            let t3 = t2 * t;
            (2.0 * t3 - 3.0 * t2 + 1.0) * c0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * c1 + (t3 - t2) * m1
        };
        let dhermite = |t: f64| {
            let t2 = t * t;
            (6.0 * t2 - 6.0 * t) * c0 + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (-6.0 * t2 + 6.0 * t) * c1 + (3.0 * t2 - 2.0 * t) * m1
        };
        // safeguarded Newton on [0, 1]
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut t = if c1 > c0 { ((u - c0) / (c1 - c0)).clamp(0.0, 1.0) } else { 0.5 };
        for _ in 0..60 {
            let g = hermite(t) - u;
            if g.abs() < 1e-15 {
                break;
            }
            if g > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let d = dhermite(t);
            let mut next = if d > 0.0 { t - g / d } else { 0.5 * (lo + hi) };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() < 1e-15 {
                t = next;
                break;
            }
            t = next;
        }
        x0 + t * h
    }
}
