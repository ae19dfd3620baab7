//! Maximal-multiplicity designs for the scalar two-delay equation
//! `y'(t) + a0 y(t) + a1 y(t - τ1) + a2 y(t - τ2) = 0`, and the numerical
//! machinery used to check that the designed triple root dominates the
//! spectrum: argument-principle root finding, an explicit right-half-plane
//! root count, continuation in the delay ratio and time-domain simulation.

pub mod continuation;
pub mod dde_sim;
pub mod mid_design;
mod quad;
pub mod quasipoly;
pub mod rhp_counter;
pub mod rootfinder;

pub use mid_design::{mid_coefficients, normalized_mid, MidDesign};
pub use num_complex::Complex64;
pub use quasipoly::Quasipolynomial;
