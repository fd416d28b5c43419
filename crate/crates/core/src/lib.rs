//! Generalized Hardy spaces for the conjugate Beltrami equation `∂̄f = ν·conj(∂f)`
//! on the unit disk.

// Positivity checks are written `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod coeff;
pub mod domains;
pub mod error;
pub mod expr;
pub mod factor;
pub mod grid;
pub mod krylov;
pub mod ops;
pub mod radial_oracle;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
