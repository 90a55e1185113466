//! Spectral stochastic-Galerkin core for a stochastic ferrofluid system with
//! magnetization diffusion on the periodic box `[0, 2π)³`.
//!
//! The unknowns are the velocity `u`, the internal rotation `w`, the
//! magnetization `M` and the magnetic field `H` (with induction `B = μ₀(M + H)`).
//! Every field is a trigonometric polynomial with `‖k‖∞ ≤ k_max`, so all the
//! integration-by-parts identities of the continuous problem hold exactly in
//! coefficients.
//!
//! Layers, bottom-up:
//!
//! - [`spectral`]: lattice, Fourier fields, projections, Helmholtz split, grids.
//! - [`operators`]: bilinear and trilinear maps, evaluated by direct triad
//!   convolution (oracle) or by dealiased pseudospectral products (fast path).
//! - [`noise`]: transport-noise families, assumption checks, diffusion maps.
//! - [`galerkin`]: the coefficient state and the assembled drift and diffusion.
//! - [`integrator`]: counter-based Brownian increments, (tamed) Euler–Maruyama,
//!   stopping radius, ensembles.
//! - [`diagnostics`]: energy ledger, Monte Carlo audits, admissibility windows,
//!   weak residuals.
//!
//! The crate is `no_std` + `alloc` unless the `std` feature is enabled.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod diagnostics;
pub mod error;
pub mod galerkin;
pub mod integrator;
pub mod noise;
pub mod operators;
pub mod rng;
pub mod spectral;
pub mod stats;

mod math;
#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
