//! Exact construction and verification of Markov dualities for the
//! multi-species, open and braided asymmetric simple exclusion processes.
//!
//! Everything algebraic runs in [`qnum::Rational`]; only [`sim`] uses floats.

pub mod cli;
pub mod coideal;
pub mod duality;
pub mod error;
pub mod fusion;
pub mod generators;
pub mod hecke;
pub mod linalg;
pub mod qnum;
pub mod sim;
pub mod states;
pub mod verify;

pub use error::{Error, Result};
pub use qnum::Rational;
