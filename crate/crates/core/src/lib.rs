//! Low-rank matrix completion of sparsely sampled 2D ESEEM data.
//!
//! The crate covers the whole numerical pipeline: a spin-Hamiltonian
//! simulator for the nitrogen-vacancy centre producing time-domain data,
//! uniform random sampling masks, the singular value thresholding (SVT)
//! completion solver, 2D spectra with peak picking, and the fidelity sweeps
//! used to judge reconstructions.

pub mod analysis;
pub mod error;
pub mod linalg;
pub mod rng;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DenseMatrix, RealMatrix, SvdFactorization};
pub mod sampling;
pub mod spectral;
pub mod spin_sim;
pub mod svt;
