//! Commuting conjugations of unitary operators.
//!
//! A conjugation is an antilinear, isometric, involutive map `C`; it
//! commutes with a unitary `U` when `CUC = U`. This crate decides whether
//! such conjugations exist for a unitary matrix, constructs and samples
//! them, decomposes them into free parameters, and verifies membership. It
//! also provides executable models built from atomic spectral measures,
//! shift operators on roots of unity, and the Fourier and Hilbert
//! transforms.

pub mod antilinear;
pub mod cli;
pub mod conjugation_family;
pub mod error;
pub mod linalg;
pub mod measure;
pub mod shift;
pub mod spectral;
pub mod transforms;

pub use error::{Error, Result};
