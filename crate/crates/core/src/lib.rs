//! Variational solver and verification tools for critical Schrödinger
//! equations with a central inverse-square potential and symmetric rings of
//! inverse-square poles.

pub mod closed_forms;
pub mod discretization;
pub mod error;
pub mod geometry;
pub mod minimizer;
pub mod potentials;
pub mod quadrature;
pub mod studies;

pub use error::{Error, Result};
