//! The collision operator restricted to a velocity grid.
//!
//! With `F_i` the grid-normalized equilibrium and `b_ij` symmetric, the
//! discrete gain is `K(f)_i = F_i Σ_j b_ij w_j f_j` and the discrete
//! frequency is defined as `ν_i = Σ_j b_ij w_j F_j`. Balance `K(F) = νF`,
//! mass conservation and the coercivity identity then hold exactly on the
//! grid; the deviation of `ν_i` from the continuous frequency is reported
//! as [`DiscreteOperator::balance_rescale`].

use super::{CollisionKernel, KernelKind, VelocityGrid};
use crate::error::bail;
use crate::math::{ball_volume, bracket, norm};
use crate::Result;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
enum Gain {
    /// `b ≡ 1`
    Bgk,
    /// `b_ij = u_i u_j`
    Rank1(Vec<f64>),
    /// row-major `b_ij`
    Dense(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivityReport {
    /// `∫ L(f) f / F dv`
    pub lhs: f64,
    /// `-(1/2M) ∫ |f - ⟨f⟩F|² ν / F dv`
    pub rhs: f64,
    pub pass: bool,
}

/// Zero-mean solution of `L(χ) = -v F` and the resulting diffusion matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CellProblemSolution {
    /// `chi[d][i]`: component `d` at node `i`.
    pub chi: Vec<Vec<f64>>,
    pub d: [[f64; 3]; 3],
    /// `max_i |L(χ_d)_i + v_{i,d} F_i|` over all components.
    pub residual: f64,
    /// Ratio of extreme pivots of the bordered system.
    pub condition_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    kind: KernelKind,
    beta: f64,
    grid: VelocityGrid,
    f: Vec<f64>,
    nu: Vec<f64>,
    gain: Gain,
    grid_mass: f64,
    balance_rescale: f64,
}

impl DiscreteOperator {
    pub fn new(kernel: &CollisionKernel, grid: VelocityGrid) -> Result<Self> {
        let eq = kernel.equilibrium();
        if eq.dim() != grid.dim() {
            bail!(InvalidInput, "grid dimension {} does not match the equilibrium ({})", grid.dim(), eq.dim());
        }
        let n = grid.len();
        let raw: Vec<f64> = grid.nodes().iter().map(|v| eq.density(norm(v))).collect();
        let grid_mass = grid.integrate(&raw);
        let f: Vec<f64> = raw.iter().map(|x| x / grid_mass).collect();
        let w = grid.weights();
        let beta = kernel.beta();
        let gain = match kernel.kind() {
            KernelKind::Bgk => Gain::Bgk,
            KernelKind::Separable => {
                Gain::Rank1(grid.nodes().iter().map(|v| libm::pow(bracket(norm(v)), beta)).collect())
            }
            kind => {
                let nodes = grid.nodes();
                let dim = grid.dim() as f64;
                let rows = crate::par::map_range(n, |i| {
                    let mut row = vec![0.0; n];
                    for (j, b) in row.iter_mut().enumerate() {
                        *b = if i == j {
                            match kind {
                                // average of |s|^β over the ball carrying the node's weight
                                KernelKind::Physical => {
                                    let rho = libm::pow(w[i] / ball_volume(grid.dim(), 1.0), 1.0 / dim);
                                    dim * libm::pow(rho, beta) / (dim + beta)
                                }
                                _ => 1.0,
                            }
                        } else {
                            kernel.b(&nodes[i], &nodes[j])
                        };
                    }
                    row
                });
                Gain::Dense(rows.concat())
            }
        };
        let mut op = Self {
            kind: kernel.kind(),
            beta,
            grid,
            f,
            nu: Vec::new(),
            gain,
            grid_mass,
            balance_rescale: 0.0,
        };
        let mut nu = vec![0.0; n];
        op.gain_into(&op.f.clone(), &mut nu);
        for (nu, f) in nu.iter_mut().zip(&op.f) {
            *nu /= f;
        }
        op.balance_rescale = op
            .grid
            .nodes()
            .iter()
            .zip(&nu)
            .map(|(v, nd)| (nd / kernel.nu_fast(norm(v)) - 1.0).abs())
            .fold(0.0, f64::max);
        op.nu = nu;
        Ok(op)
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// Equilibrium at the nodes, normalized so that `Σ w_i F_i = 1`.
    pub fn equilibrium(&self) -> &[f64] {
        &self.f
    }

    /// Discrete (balanced) collision frequency.
    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    /// `Σ w_i F(v_i)` before normalization.
    pub fn grid_mass(&self) -> f64 {
        self.grid_mass
    }

    /// `max_i |ν_i / ν(v_i) - 1|` between the balanced and the continuous
    /// frequency.
    pub fn balance_rescale(&self) -> f64 {
        self.balance_rescale
    }

    /// Low-rank form `K(f)_i = F_i u_i Σ_j c_j f_j`, if the kernel has one.
    pub fn rank_one(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let w = self.grid.weights();
        match &self.gain {
            Gain::Bgk => Some((self.f.clone(), w.to_vec())),
            Gain::Rank1(u) => Some((
                self.f.iter().zip(u).map(|(f, u)| f * u).collect(),
                u.iter().zip(w).map(|(u, w)| u * w).collect(),
            )),
            Gain::Dense(_) => None,
        }
    }

    /// `⟨f⟩ = Σ w_i f_i`.
    pub fn mean(&self, f: &[f64]) -> f64 {
        self.grid.integrate(f)
    }

    /// Writes `K(f)` into `out`.
    pub fn gain_into(&self, f: &[f64], out: &mut [f64]) {
        let w = self.grid.weights();
        let n = self.f.len();
        match &self.gain {
            Gain::Bgk => {
                let m = self.grid.integrate(f);
                for (o, fe) in out.iter_mut().zip(&self.f) {
                    *o = m * fe;
                }
            }
            Gain::Rank1(u) => {
                let terms: Vec<f64> = u.iter().zip(w).zip(f).map(|((u, w), f)| u * w * f).collect();
                let m = crate::math::pairwise_sum(&terms);
                for ((o, fe), u) in out.iter_mut().zip(&self.f).zip(u) {
                    *o = m * fe * u;
                }
            }
            Gain::Dense(b) => {
                let wf: Vec<f64> = w.iter().zip(f).map(|(w, f)| w * f).collect();
                for i in 0..n {
                    let row = &b[i * n..(i + 1) * n];
                    let s: f64 = row.iter().zip(&wf).map(|(b, x)| b * x).sum();
                    out[i] = self.f[i] * s;
                }
            }
        }
    }

    fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.f.len() {
            bail!(InvalidInput, "grid function has {} values, grid has {} nodes", f.len(), self.f.len());
        }
        Ok(())
    }

    /// `L(f) = K(f) - ν f`.
    pub fn apply_l(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f)?;
        let mut out = vec![0.0; f.len()];
        self.gain_into(f, &mut out);
        for ((o, nu), f) in out.iter_mut().zip(&self.nu).zip(f) {
            *o -= nu * f;
        }
        Ok(out)
    }

    /// `b_ij` for the current grid.
    fn b_entry(&self, i: usize, j: usize) -> f64 {
        match &self.gain {
            Gain::Bgk => 1.0,
            Gain::Rank1(u) => u[i] * u[j],
            Gain::Dense(b) => b[i * self.f.len() + j],
        }
    }

    /// Grid version of the coercivity bound:
    /// `max_i ν_i Σ_j w_j F_j / b_ij + (Σ_j w_j F_j/ν_j · b_ij²)^{1/2} / ν_i`.
    pub fn b3_bound(&self) -> f64 {
        let n = self.f.len();
        let w = self.grid.weights();
        let rows = crate::par::map_range(n, |i| {
            let mut inv = 0.0;
            let mut sq = 0.0;
            for j in 0..n {
                let b = self.b_entry(i, j);
                inv += w[j] * self.f[j] / b;
                sq += w[j] * self.f[j] / self.nu[j] * b * b;
            }
            self.nu[i] * inv + libm::sqrt(sq) / self.nu[i]
        });
        rows.into_iter().fold(0.0, f64::max)
    }

    /// Checks `∫ L(f) f/F ≤ -(1/2M) ∫ |f - ⟨f⟩F|² ν/F` with the bound
    /// constant `m_b3` from a prior bound check.
    pub fn coercivity_check(&self, f: &[f64], m_b3: Option<f64>) -> Result<CoercivityReport> {
        self.check_len(f)?;
        let Some(m) = m_b3 else {
            bail!(Precondition, "no bound constant M available; run the b3 bound check first");
        };
        if !(m > 0.0 && m.is_finite()) {
            bail!(Precondition, "bound constant M = {m} is not usable");
        }
        let lf = self.apply_l(f)?;
        let mean = self.mean(f);
        let lhs_terms: Vec<f64> = lf.iter().zip(f).zip(&self.f).map(|((l, f), fe)| l * f / fe).collect();
        let rhs_terms: Vec<f64> = f
            .iter()
            .zip(&self.f)
            .zip(&self.nu)
            .map(|((f, fe), nu)| {
                let g = f - mean * fe;
                g * g * nu / fe
            })
            .collect();
        let lhs = self.grid.integrate(&lhs_terms);
        let dissip = self.grid.integrate(&rhs_terms);
        let scale: f64 = self.grid.integrate(
            &f.iter().zip(&self.f).zip(&self.nu).map(|((f, fe), nu)| f * f * nu / fe).collect::<Vec<_>>(),
        );
        // M enters with the quadrature-noise allowance of the bound check
        let rhs = -dissip / (2.0 * m * (1.0 + 1e-6));
        let pass = lhs <= rhs + 1e-12 * scale;
        Ok(CoercivityReport { lhs, rhs, pass })
    }

    /// Solves `L(χ_d) = -v_d F` with `⟨χ_d⟩ = 0` for each coordinate `d`.
    pub fn solve_cell_problem(&self) -> Result<CellProblemSolution> {
        let n = self.f.len();
        let dim = self.grid.dim();
        let w = self.grid.weights();
        let nodes = self.grid.nodes();
        let m = n + 1;
        // bordered system [L F; wᵀ 0]
        let mut a = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                a[i * m + j] = self.f[i] * self.b_entry(i, j) * w[j];
            }
            a[i * m + i] -= self.nu[i];
            a[i * m + n] = self.f[i];
            a[n * m + i] = w[i];
        }
        let mut rhs: Vec<Vec<f64>> = (0..dim)
            .map(|d| {
                let mut r: Vec<f64> = (0..n).map(|i| -nodes[i][d] * self.f[i]).collect();
                r.push(0.0);
                r
            })
            .collect();
        let cond = lu_solve(m, &mut a, &mut rhs)?;
        let chi: Vec<Vec<f64>> = rhs.into_iter().map(|mut x| {
            x.truncate(n);
            x
        }).collect();
        let mut residual = 0.0f64;
        let mut dmat = [[0.0; 3]; 3];
        for (d, x) in chi.iter().enumerate() {
            let lx = self.apply_l(x)?;
            for i in 0..n {
                residual = residual.max((lx[i] + nodes[i][d] * self.f[i]).abs());
            }
            for (a, row) in dmat.iter_mut().enumerate().take(dim) {
                let terms: Vec<f64> = (0..n).map(|i| w[i] * nodes[i][a] * x[i]).collect();
                row[d] = crate::math::pairwise_sum(&terms);
            }
        }
        Ok(CellProblemSolution { chi, d: dmat, residual, condition_estimate: cond })
    }
}

/// Gaussian elimination with partial pivoting; `a` is row-major `m × m`
/// and is overwritten. Returns the ratio of extreme pivot magnitudes.
fn lu_solve(m: usize, a: &mut [f64], rhs: &mut [Vec<f64>]) -> Result<f64> {
    let mut piv_max = 0.0f64;
    let mut piv_min = f64::INFINITY;
    let scale = a.iter().fold(0.0f64, |s, x| s.max(x.abs()));
    for k in 0..m {
        let p = (k..m)
            .max_by(|&i, &j| a[i * m + k].abs().partial_cmp(&a[j * m + k].abs()).unwrap())
            .unwrap();
        let pv = a[p * m + k];
        if !(pv.abs() > 1e-14 * scale) {
            bail!(NumericalFailure, "singular system at column {k} (pivot {pv:e})");
        }
        if p != k {
            for j in 0..m {
                a.swap(p * m + j, k * m + j);
            }
            for r in rhs.iter_mut() {
                r.swap(p, k);
            }
        }
        piv_max = piv_max.max(pv.abs());
        piv_min = piv_min.min(pv.abs());
        let (upper, lower) = a.split_at_mut((k + 1) * m);
        let row_k = &upper[k * m..(k + 1) * m];
        for (off, row) in lower.chunks_mut(m).enumerate() {
            let i = k + 1 + off;
            let factor = row[k] / pv;
            if factor == 0.0 {
                continue;
            }
            for j in k..m {
                row[j] -= factor * row_k[j];
            }
            for r in rhs.iter_mut() {
                r[i] -= factor * r[k];
            }
        }
    }
    for r in rhs.iter_mut() {
        for k in (0..m).rev() {
            let mut s = r[k];
            for j in k + 1..m {
                s -= a[k * m + j] * r[j];
            }
            r[k] = s / a[k * m + k];
        }
    }
    Ok(piv_max / piv_min)
}
