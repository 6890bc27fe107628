//! Small numerical helpers shared by the modules.

use crate::{Vector, MAX_DIM};
use core::f64::consts::PI;

#[allow(unused_imports)]
pub(crate) use num_traits::Float;

pub fn norm(v: &Vector) -> f64 {
    libm::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
}

pub fn dot(a: &Vector, b: &Vector) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn neg(v: &Vector) -> Vector {
    [-v[0], -v[1], -v[2]]
}

pub fn scale(v: &Vector, s: f64) -> Vector {
    [v[0] * s, v[1] * s, v[2] * s]
}

/// Japanese bracket `(1 + r^2)^(1/2)`.
pub fn bracket(r: f64) -> f64 {
    libm::sqrt(1.0 + r * r)
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Surface measure of the unit sphere in dimension `dim` (2 for `dim = 1`).
pub fn sphere_area(dim: usize) -> f64 {
    let h = dim as f64 / 2.0;
    2.0 * libm::pow(PI, h) / gamma(h)
}

/// Volume of the ball of radius `r` in dimension `dim`.
pub fn ball_volume(dim: usize, r: f64) -> f64 {
    sphere_area(dim) / dim as f64 * libm::pow(r, dim as f64)
}

/// `∫_{|ω|=1} |ω_1|^a dσ(ω)`.
pub fn sphere_abs_moment(dim: usize, a: f64) -> f64 {
    let n = dim as f64;
    2.0 * libm::pow(PI, (n - 1.0) / 2.0) * gamma((a + 1.0) / 2.0) / gamma((n + a) / 2.0)
}

pub(crate) fn check_dim(dim: usize) -> crate::Result<()> {
    if dim == 0 || dim > MAX_DIM {
        crate::error::bail!(InvalidInput, "dimension {dim} outside 1..={MAX_DIM}");
    }
    Ok(())
}

pub(crate) fn check_finite(v: &Vector) -> crate::Result<()> {
    if v.iter().any(|c| !c.is_finite()) {
        crate::error::bail!(InvalidInput, "non-finite vector {v:?}");
    }
    Ok(())
}

/// Pairwise summation; the result depends only on the input order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Log-log least-squares slope.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: alloc::vec::Vec<f64> = xs.iter().map(|x| libm::log(*x)).collect();
    let ly: alloc::vec::Vec<f64> = ys.iter().map(|y| libm::log(*y)).collect();
    ls_slope(&lx, &ly)
}

/// Geometric grid of `n` points from `a` to `b` inclusive.
pub fn geomspace(a: f64, b: f64, n: usize) -> alloc::vec::Vec<f64> {
    if n == 1 {
        return alloc::vec![a];
    }
    let (la, lb) = (libm::log(a), libm::log(b));
    (0..n)
        .map(|i| libm::exp(la + (lb - la) * i as f64 / (n - 1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_constants() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        // ∫ ω_1^2 over S^{N-1} is |S^{N-1}|/N
        for d in 1..=3 {
            let lhs = sphere_abs_moment(d, 2.0);
            assert!((lhs - sphere_area(d) / d as f64).abs() < 1e-12, "dim {d}");
        }
    }

    #[test]
    fn slope_of_power_law() {
        let xs = geomspace(1.0, 100.0, 7);
        let ys: alloc::vec::Vec<f64> = xs.iter().map(|x| 3.0 * libm::pow(*x, -1.25)).collect();
        assert!((loglog_slope(&xs, &ys) + 1.25).abs() < 1e-12);
    }
}
