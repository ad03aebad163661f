//! Spectral and topological computations for the Landau Hamiltonian and its
//! spin-orbit (Jaynes-Cummings) and Quaternionic extensions.
//!
//! Operators live on a truncated two-mode Fock space; ranks and Chern numbers
//! come out of a numerical Dixmier trace and are cross-checked against
//! traces per unit volume computed from position-space kernels.

pub mod error;
pub mod exec;
pub mod fit;
pub mod fock;
pub mod kernels;
pub mod models;
pub mod params;
pub mod singtrace;
pub mod specfun;
pub mod topo;
pub mod tuv;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use params::ModelParams;
