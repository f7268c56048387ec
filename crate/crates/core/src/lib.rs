//! Numerical laboratory for Haar-measure quantum encryption.
//!
//! The crate implements the rank-r Haar-measure encryption of n messages,
//! the explicit basis-measurement attacks against it, seeded Monte Carlo
//! estimation of Haar-averaged attack values, the exact closed forms and
//! bounds those values obey, and Weingarten-calculus machinery that
//! certifies the unitary-moment inequalities behind the upper bounds.

pub mod attacks;
pub mod error;
pub mod estimator;
pub mod formulas;
pub mod linalg;
pub mod qecm;
pub mod weingarten;

pub use error::{Error, Result};
