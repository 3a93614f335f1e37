//! Quantum fermion dynamics from a classical Ising-type ensemble.
//!
//! Classical wave functions `q_τ = s_τ √p_τ` over bit configurations evolve
//! by rotations generated from a real Grassmann lattice action. The crate
//! provides the exact Grassmann oracle, sector-restricted sparse generators,
//! classical observables, and direct one-particle Dirac and Schrödinger
//! solvers used to cross-check the many-body evolution.

pub mod ensemble;
pub mod error;
pub mod config;
pub mod demos;
pub mod dirac;
pub mod evolution;
pub mod fft;
pub mod grassmann;
pub mod grid;
pub mod lattice;
pub mod observables;
pub mod schrodinger;
pub mod sectors;
pub mod sparse;

pub use error::{Error, Result};
