//! Krylov methods for the matrix geometric mean `(A # B) v` of large sparse
//! symmetric positive definite matrices.

pub mod baselines;
pub mod dense;
pub mod error;
pub mod krylov;
pub mod poles;
pub mod solvers;
pub mod sparse;
pub mod vector;

pub use error::{Error, Result};
