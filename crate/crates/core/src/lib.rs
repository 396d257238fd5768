//! Exact arithmetic for even lattices, finite quadratic forms, overlattices
//! and Fourier-Mukai partner counts of K3 surfaces.

#![allow(clippy::needless_range_loop)]

pub mod claims;
pub mod discform;
pub mod error;
pub mod genus;
pub mod intlinalg;
pub mod k3;
pub mod lattice;
pub mod overlattice;
pub mod par;

pub use error::{Error, Result};
