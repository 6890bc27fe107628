//! Anomalous diffusion limits of linear collisional kinetic equations.
//!
//! The crate evaluates heavy-tailed equilibria, linear Boltzmann / BGK
//! collision operators on velocity grids, the Laplace-Fourier symbol of the
//! rescaled kinetic equation and its limit coefficient, and provides
//! per-mode kinetic solvers, limit-equation solvers and a velocity-jump
//! Monte Carlo simulation of the same process.
//!
//! The crate is `no_std` (it needs `alloc`). The `parallel` feature enables
//! rayon-backed sweeps; results do not depend on it.

#![no_std]

extern crate alloc;

#[cfg(feature = "parallel")]
extern crate std;

pub mod collision;
pub mod equilibria;
mod error;
pub mod math;
pub mod montecarlo;
mod par;
pub mod quadrature;
pub mod scaling;
pub mod solvers;
pub mod symbol;

pub use error::{Error, Result};

/// Velocity or wave vector. Components past the working dimension are zero,
/// so norms and dot products are dimension-agnostic.
pub type Vector = [f64; 3];

/// Largest supported velocity/space dimension.
pub const MAX_DIM: usize = 3;
