//! Spectral analysis of operator pencils `lambda E - A` on `C^n`, `l2(N)`
//! and `l2(Z)`: singular chains and polynomials, approximate singularity,
//! finite-section certificates, dissipative-Hamiltonian structure and the
//! associated differential-algebraic equations.

pub mod approxsing;
pub mod cli;
pub mod dhcheck;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod odae;
pub mod opmodel;
pub mod report;
pub mod sections;
pub mod singpoly;
pub mod spectra;
pub mod vector;

pub use error::{Error, Result};
pub use opmodel::{Pencil, SpaceDescriptor, StructuredOperator, WeightRule};
pub use vector::SparseVec;
