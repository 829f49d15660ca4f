//! Non-local finite-difference approximations of free-discontinuity
//! functionals.

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod energy;
pub mod energy_1d;
pub mod energy_nd;
pub mod kernels;
pub mod lab;
pub mod limit_energy;
pub mod minimizer;
pub mod error;
pub mod numeric;
pub mod phi_family;

pub use energy::Energy;
pub use error::{Error, Result};
