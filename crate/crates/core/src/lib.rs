//! Executable finitary machinery around Szemerédi-type recurrence on Z_N.
//!
//! The crate is organised bottom-up:
//!
//! * [`cyclic`]: functions on Z_N, shifts, dilations, expectations.
//! * [`gowers`]: Gowers uniformity norms and dual functions.
//! * [`partition`]: finite σ-algebras, conditional expectation, energy.
//! * [`uap`]: certificates of uniform almost periodicity and their algebra.
//! * [`levelset`]: σ-algebras generated by level sets of certified functions.
//! * [`structure`]: the energy-increment driver and the structure decomposition.
//! * [`recurrence`]: brute-force recurrence averages, gating sets, nets, sampling.
//! * [`vdw`]: van der Waerden search, colour-focusing and bound recursion.

pub mod config;
pub mod cyclic;
pub mod error;
pub mod gowers;
pub mod io;
pub mod levelset;
pub mod partition;
pub mod recurrence;
pub mod rng;
pub mod structure;
pub mod sum;
pub mod uap;
pub mod vdw;

#[cfg(test)]
mod testutil;

pub use cyclic::{Complexity, GroupFunction, Polynomial, QuasiTerm, DEFAULT_TOL};
pub use error::{Error, Result};
