//! Numerical core of the edgescale laboratory.
//!
//! The crate samples the tridiagonal random Schrödinger operators
//! `ψ_{ℓ-1} + ψ_{ℓ+1} + v_ℓ ψ_ℓ` with vanishing potentials, computes certified
//! extreme eigenvalues with a Sturm-sequence bisection solver, and checks the
//! rescaled edge against three independent descriptions of the limit:
//!
//! - [`continuum`]: the operator `-d²/dx² - σW'` on `[0, 1]`, sampled by grid
//!   discretization and independently by Riccati blow-up counting, plus the
//!   stochastic Airy operator for the shifted-mean model;
//! - [`feynman_kac`]: Monte Carlo estimators of the semigroup kernel built from
//!   confined Brownian bridges and their local times against a quenched noise;
//! - [`edge_stats`]: rescaling, Laplace sums, Kolmogorov-Smirnov distances and
//!   tail-exponent fits.
//!
//! Everything here is `no_std` (with `alloc`) and free of IO. Randomness flows
//! through [`rng::RngStream`], a counter-based stream keyed by
//! `(root_seed, stream_index)`, and replica loops go through an [`Executor`]
//! so that callers can fan out over threads without changing any result.
#![no_std]

extern crate alloc;

pub mod continuum;
pub mod edge_stats;
pub mod eigen;
mod error;
mod exec;
pub mod feynman_kac;
pub mod local_time;
pub mod operators;
pub mod paths;
pub mod riccati;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
