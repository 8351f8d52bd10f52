//! Desk-scale numerical laboratory for the semiclassical mean-field theory of
//! large Fermi systems: Thomas-Fermi and grand-canonical Hartree solvers,
//! Wigner/Weyl phase-space calculus, Weyl-law and spectral-window
//! diagnostics, and an exact finite-mode Fock-space verifier for the
//! second-quantization side of the theory.

// Link the system OpenBLAS (LAPACK + CBLAS providers for lapack-sys and ndarray).
extern crate openblas_src;

pub mod config;
pub mod error;
pub mod fock;
pub mod harness;
pub mod hartree;
pub mod lattice;
mod linalg;
pub mod phase_space;
pub mod potentials;
pub mod report;
pub mod semiclassics;
pub mod thomas_fermi;

pub use error::{Error, Result};
