//! Atomic dimers coupled to a one-dimensional subwavelength atomic array.
//!
//! The library models a chain of two-level atoms whose collective guided
//! modes act as a waveguide for pairs of impurity atoms (dimers) placed next
//! to it. Everything lives in the single-excitation sector, so dynamics reduce
//! to a dense non-Hermitian Schrödinger equation.
//!
//! Module layout, bottom up:
//!
//! - [`units`], [`config`]: unit conventions and validated geometry.
//! - [`greens`]: free-space Green's function and two-atom couplings.
//! - [`chain`]: chain Hamiltonian, eigenmodes and band-edge parameters.
//! - [`coupling`]: closed-form atom, dimer and plaquette couplings to modes.
//! - [`raman`]: full Raman-driven Hamiltonian and its effective reductions.
//! - [`dynamics`]: propagation and the measurement procedures built on it.
//! - [`bandgap`]: band-gap mediated dimer–dimer couplings and error budgets.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandgap;
pub mod chain;
pub mod config;
pub mod coupling;
pub mod dynamics;
pub mod error;
pub mod greens;
pub mod hamiltonian;
pub mod linalg;
pub mod par;
pub mod raman;
pub mod units;

pub use error::{AwqError, Result};
pub use num_complex::Complex64;
