//! Symmetric velocity quadrature grids.

use crate::equilibria::HeavyTailEquilibrium;
use crate::error::bail;
use crate::math::geomspace;
use crate::quadrature::{composite_rule, gauss_legendre};
use crate::{Result, Vector};
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Resolution of a [`VelocityGrid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Truncation radius; mass beyond it is accounted for analytically.
    pub r_outer: f64,
    pub radial_panels: usize,
    pub nodes_per_panel: usize,
    /// Angles in 2-D; polar-cosine nodes in 3-D (twice as many azimuths).
    pub angular_nodes: usize,
}

impl GridSpec {
    /// Defaults: 512 nodes on `[-10⁶, 10⁶]` in 1-D (mode `k` at scale `ε`
    /// needs speeds up to `1/(ε|k|)`), radial-angular product rules inside
    /// `|v| ≤ 10²` otherwise. Pure Gaussians use `|v| ≤ 12`.
    pub fn default_for(eq: &HeavyTailEquilibrium) -> Self {
        let r_outer = if eq.has_tail() {
            if eq.dim() == 1 { 1e6 } else { 1e2 }
        } else {
            12.0
        };
        match eq.dim() {
            1 => Self { r_outer, radial_panels: 16, nodes_per_panel: 16, angular_nodes: 1 },
            2 => Self { r_outer, radial_panels: 8, nodes_per_panel: 8, angular_nodes: 16 },
            _ => Self { r_outer, radial_panels: 6, nodes_per_panel: 8, angular_nodes: 4 },
        }
    }
}

/// Tensor-product quadrature inside `|v| ≤ r_outer`, closed under `v ↦ -v`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityGrid {
    dim: usize,
    spec: GridSpec,
    nodes: Vec<Vector>,
    weights: Vec<f64>,
    /// For each node, the index of its mirror image `-v`.
    mirror: Vec<usize>,
    tail_mass: f64,
}

impl VelocityGrid {
    pub fn new(eq: &HeavyTailEquilibrium, spec: GridSpec) -> Result<Self> {
        let dim = eq.dim();
        if !(spec.r_outer > 0.0 && spec.r_outer.is_finite()) || spec.radial_panels == 0 || spec.nodes_per_panel == 0 {
            bail!(InvalidInput, "invalid grid spec {spec:?}");
        }
        if dim > 1 && (spec.angular_nodes < 2 || spec.angular_nodes % 2 != 0) {
            bail!(InvalidInput, "angular node count must be even and at least 2");
        }
        let edges = radial_edges(eq, &spec)?;
        let (rs, rw) = composite_rule(&edges, spec.nodes_per_panel);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        match dim {
            1 => {
                // negative half reversed, then positive half: node i mirrors n-1-i
                for (r, w) in rs.iter().zip(&rw).rev() {
                    nodes.push([-r, 0.0, 0.0]);
                    weights.push(*w);
                }
                for (r, w) in rs.iter().zip(&rw) {
                    nodes.push([*r, 0.0, 0.0]);
                    weights.push(*w);
                }
            }
            2 => {
                let m = spec.angular_nodes;
                for (r, w) in rs.iter().zip(&rw) {
                    for j in 0..m {
                        let phi = 2.0 * PI * (j as f64 + 0.5) / m as f64;
                        nodes.push([r * libm::cos(phi), r * libm::sin(phi), 0.0]);
                        weights.push(r * w * 2.0 * PI / m as f64);
                    }
                }
            }
            _ => {
                let (mu, mw) = gauss_legendre(spec.angular_nodes);
                let m = 2 * spec.angular_nodes;
                for (r, w) in rs.iter().zip(&rw) {
                    for (c, cw) in mu.iter().zip(&mw) {
                        let st = libm::sqrt(1.0 - c * c);
                        for j in 0..m {
                            let phi = 2.0 * PI * (j as f64 + 0.5) / m as f64;
                            nodes.push([r * st * libm::cos(phi), r * st * libm::sin(phi), r * c]);
                            weights.push(r * r * w * cw * 2.0 * PI / m as f64);
                        }
                    }
                }
            }
        }
        let mirror = mirror_map(dim, rs.len(), &spec);
        let tail_mass = 1.0 - eq.radial_cdf(spec.r_outer)?;
        Ok(Self { dim, spec, nodes, weights, mirror, tail_mass })
    }

    pub fn default_for(eq: &HeavyTailEquilibrium) -> Result<Self> {
        Self::new(eq, GridSpec::default_for(eq))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vector] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mirror(&self) -> &[usize] {
        &self.mirror
    }

    pub fn r_outer(&self) -> f64 {
        self.spec.r_outer
    }

    /// Mass of the equilibrium beyond `r_outer`, from the analytic radial CDF.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// `Σ w_i g(v_i)`.
    pub fn integrate(&self, g: &[f64]) -> f64 {
        let terms: Vec<f64> = self.weights.iter().zip(g).map(|(w, g)| w * g).collect();
        crate::math::pairwise_sum(&terms)
    }
}

fn radial_edges(eq: &HeavyTailEquilibrium, spec: &GridSpec) -> Result<Vec<f64>> {
    let n = spec.radial_panels;
    let rc = eq.r_cut();
    if !rc.is_finite() || rc >= spec.r_outer {
        return Ok((0..=n).map(|i| spec.r_outer * i as f64 / n as f64).collect());
    }
    if n < 2 {
        bail!(InvalidInput, "a heavy-tailed grid needs at least two radial panels");
    }
    let core = (n / 4).max(1);
    let mut edges: Vec<f64> = (0..core).map(|i| rc * i as f64 / core as f64).collect();
    edges.extend(geomspace(rc, spec.r_outer, n - core + 1));
    Ok(edges)
}

/// Index of `-v` for each node, from the generation order above.
fn mirror_map(dim: usize, nr: usize, spec: &GridSpec) -> Vec<usize> {
    match dim {
        1 => (0..2 * nr).map(|i| 2 * nr - 1 - i).collect(),
        2 => {
            let m = spec.angular_nodes;
            (0..nr * m).map(|i| (i / m) * m + (i % m + m / 2) % m).collect()
        }
        _ => {
            let nm = spec.angular_nodes;
            let m = 2 * nm;
            (0..nr * nm * m)
                .map(|i| {
                    let (shell, rest) = (i / (nm * m), i % (nm * m));
                    let (k, j) = (rest / m, rest % m);
                    shell * nm * m + (nm - 1 - k) * m + (j + m / 2) % m
                })
                .collect()
        }
    }
}
