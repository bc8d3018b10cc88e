//! Numerical toolkit for multi-order time-fractional evolution equations.
//!
//! Fundamental solutions of `sum_i lambda_i D_t^{nu_i} u = F(D_x) u` are
//! computed two ways: by inverting their Fourier–Laplace symbol directly, and
//! by composing the solution of the space problem `u_t = F(D_x) u` with the
//! inverse-subordinator kernel `l`. Agreement between the two routes is the
//! main consistency check of the crate.

pub mod caputo;
pub mod composition;
pub mod defaults;
pub mod error;
pub mod gamma;
pub mod grid;
pub mod laplace;
pub mod montecarlo;
pub mod quad;
pub mod solver;
pub mod specfun;
pub mod subordinator;

pub use error::{Error, Result};
