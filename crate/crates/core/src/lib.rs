//! Hyper-Kloosterman sums modulo prime powers and the arithmetic around them:
//! closed forms, correlation and character sums, Hecke coefficient
//! identities, numerical experiments and verification sweeps.

pub mod bench;
pub mod closed;
pub mod corr;
pub mod error;
pub mod expsum;
pub mod harness;
pub mod hecke;
pub mod residue;
pub mod sum;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
