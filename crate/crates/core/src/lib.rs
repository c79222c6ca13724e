//! Quantum speed limits from the Sharma–Mittal entropy family.
//!
//! The crate is organised bottom-up:
//!
//! - [`matrix`]: dense complex primitives (eigendecomposition, Schatten
//!   norms, partial trace, fidelity, variance, QFI, matrix exponential).
//! - [`entropy`]: the Sharma–Mittal family with its Rényi, Tsallis and von
//!   Neumann limits, the q-purity and the weight function `g_q`.
//! - [`dynamics`]: trajectories for the amplitude-damping channel,
//!   trace-normalized non-Hermitian evolution and reduced bipartite dynamics.
//! - [`qsl`]: integrated entropy bounds, speed-limit times and tightness
//!   metrics, including parameter-grid sweeps.
//! - [`verify`]: the oracle checks that back the acceptance suite and the
//!   `verify` CLI subcommand.

// `!(x > 0.0)` is how NaN gets rejected alongside the bound.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod entropy;
pub mod error;
pub mod matrix;
pub mod qsl;
pub mod sampling;
pub mod verify;

pub use entropy::{EntropyKind, EntropyParams, WeightRegion};
pub use error::{Error, Result};
pub use matrix::{BlochVector, CMat, DensityMatrix, Observable, Subsystem};
