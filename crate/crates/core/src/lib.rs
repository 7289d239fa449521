//! Gaussian thermal states of periodic harmonic lattices, and how well a
//! block of such a state is described by a thermal state of the block alone.
//!
//! The crate is organized bottom-up:
//!
//! - [`lattice`]: potential matrices and their analytic plane-wave spectra.
//! - [`gaussian`]: covariance-matrix calculus for zero-mean Gaussian states.
//! - [`blocks`]: block geometry, the effective block potential and the
//!   reference thermal states a block is compared against.
//! - [`analysis`]: block-size sweeps, slope fits, correlation lengths and
//!   (coupling, inverse temperature) phase diagrams.
//! - [`oracle`]: an independent truncated-Fock-space implementation for one
//!   and two modes, used to certify the Gaussian formulas.

pub mod analysis;
pub mod blocks;
pub mod error;
pub mod gaussian;
pub mod lattice;
pub mod linalg;
pub mod oracle;

pub use error::{Error, Result};
pub use gaussian::{Beta, CovarianceMatrix, Partition};
pub use lattice::{Dimension, LatticeSpec, ModeSpectrum};
pub use linalg::SymmetricMatrix;
