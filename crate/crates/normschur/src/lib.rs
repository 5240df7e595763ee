//! Real Schur decomposition of real normal matrices by Jacobi-like sweeps.
//!
//! The main entry point is [`driver::decompose`]. It runs implicit
//! Paardekooper sweeps on the skew-symmetric part, splits the matrix into
//! clusters, resolves each cluster with a structured solver and finishes with
//! a short refinement pass.

pub mod bench;
pub mod clustering;
pub mod driver;
pub mod error;
pub mod generic_jacobi;
pub mod genmat;
pub mod matcore;
pub mod nearest;
pub mod report;
pub mod skewschur;
pub mod structured;

pub use driver::{decompose, Config, SchurResult, Spectrum};
pub use error::{Error, Result};
pub use matcore::DenseMatrix;
