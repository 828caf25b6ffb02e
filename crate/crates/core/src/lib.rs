//! Robust completion of color images and videos as low-rank quaternion matrices.
//!
//! A color image is a pure quaternion matrix (red, green, blue on `i`, `j`, `k`).
//! [`solver::nrqmc_solve`] splits partial, corrupted observations into a low-rank
//! part penalized by an MCP rank surrogate and a sparse part penalized by the
//! quaternion `Lp` quasi-norm. [`nss`] applies the same solver to groups of
//! similar patches.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod imaging;
pub mod nss;
pub mod prox;
pub mod qcore;
pub mod rng;
pub mod solver;
pub mod synth;

pub use error::{Error, Result};
pub use qcore::{QMatrix, QTensor, Quaternion};
