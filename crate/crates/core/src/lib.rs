//! Conformable fractional calculus for scalar field theories.
//!
//! The crate evaluates left and right conformable α-derivatives and
//! α-integrals, assembles fractional actions from Lagrangian densities,
//! evaluates Euler-Lagrange residuals and Noether currents (general current,
//! energy-momentum and angular-momentum tensors, breaking term), and solves
//! the fractional harmonic oscillator.

pub mod error;
pub mod expr;
pub mod frac;
pub mod noether;
pub mod oscillator;
pub mod variational;

pub use error::{Error, Result};
