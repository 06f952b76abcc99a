//! Lace-expansion toolkit for the weakly self-avoiding walk on `Z^d`.
//!
//! The exact layer ([`lattice`], [`walks`], [`lace`]) works with rational
//! power series in the fugacity `z`; the numerical layer ([`green`],
//! [`fourier`], [`critical`]) evaluates kernels, Fourier transforms and the
//! near-critical two-point function in floating point.

pub mod critical;
pub mod error;
pub mod fit;
pub mod fourier;
pub mod green;
pub mod lattice;
pub mod lace;
pub mod walks;

pub use error::{Error, Result};
pub use lattice::{LatticeFunction, LatticePoint, SpatialSeries, Storage, ZPolynomial};
