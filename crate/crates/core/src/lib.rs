//! Eigenvector non-orthogonality diagnostics for non-Hermitian lattice models.
//!
//! The library builds dense Hamiltonians for a family of one-dimensional
//! non-Hermitian tight-binding models, computes the overlap measure `eta`
//! (a generalized Petermann factor in `[0, 1]`) from the Gram matrix of the
//! normalized right eigenvectors, sweeps it over a model parameter, and
//! locates discontinuities of `eta` and of its first derivative. Jumps of
//! `eta` signal edge-state coalescence; jumps of the derivative signal
//! exceptional points in the bulk spectrum.

extern crate blas_src;

pub mod analysis;
pub mod error;
pub mod io;
pub mod models;
pub mod petermann;
pub mod spectral;

pub use error::{Error, Result};
pub use models::{Boundary, Hamiltonian, ModelSpec, SiteLabel};
pub use petermann::{
    DetectorParams, DiscontinuityReport, EtaSample, JordanProfile, JumpKind, SweepResult,
};
pub use spectral::{EigenSystem, SpectrumSummary};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
